#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace crit4::trees {

// Rooted tree with unit edges. Vertex 0 is the root.
class GenealogyTree {
  public:
    GenealogyTree() : GenealogyTree(std::vector<int>{-1}) {}
    explicit GenealogyTree(std::vector<int> parent);

    int size() const { return static_cast<int>(parent_.size()); }
    int parent(int v) const { return parent_[v]; }
    const std::vector<int>& children(int v) const { return children_[v]; }
    const std::vector<int>& parents() const { return parent_; }
    int depth() const { return depth_; }           // max root distance
    int leaves() const { return leaves_; }
    int depth_of(int v) const { return vdepth_[v]; }
    // root first, every vertex after its parent
    const std::vector<int>& bfs_order() const { return order_; }

    static GenealogyTree path(int n);
    static GenealogyTree perfect_binary(int levels);

    void write(std::ostream& os) const;  // "index parent" lines, root parent -1
    static GenealogyTree read(std::istream& is);

  private:
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> vdepth_;
    std::vector<int> order_;
    int depth_ = 0;
    int leaves_ = 0;
};

class InvalidTree : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class AttemptCapReached : public std::runtime_error {
  public:
    AttemptCapReached(const std::string& what, double acceptance)
        : std::runtime_error(what), acceptance_estimate(acceptance) {}
    double acceptance_estimate;
};

enum class Condition { None, Size, Survive };

struct SampleRequest {
    Condition condition = Condition::None;
    std::uint64_t n = 1;  // size for Size, generations for Survive
    std::uint64_t max_attempts = 10000000;
    std::uint64_t max_vertices = 50000000;
};

// critical binary BGW tree, offspring 0 or 2 with probability 1/2
GenealogyTree sample_bgw(const SampleRequest& req, std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t* attempts = nullptr);

int horton_strahler(const GenealogyTree& t);
std::vector<int> horton_strahler_all(const GenealogyTree& t);

struct HighwayDecomposition {
    // each path starts at its attachment vertex and runs leaf-ward
    std::vector<std::vector<int>> paths;
    std::vector<int> edge_path;  // child vertex -> path index, -1 for the root
    std::vector<int> path_round;
    int rounds = 0;
};

HighwayDecomposition highways(const GenealogyTree& t);

struct HighwayAudit {
    bool edge_disjoint_cover;
    bool monotone;
    int max_paths_per_geodesic;
};
HighwayAudit audit_highways(const GenealogyTree& t, const HighwayDecomposition& h);

// every plane tree with n vertices (Catalan(n-1) of them)
std::vector<GenealogyTree> enumerate_trees(int n);

struct HsRow {
    std::uint64_t n;
    int replicas;
    double mean_ratio, q10, q50, q90;
    double mean_H;
};
std::vector<HsRow> hs_statistics(const std::vector<std::uint64_t>& n_grid, int replicas,
                                 std::uint64_t seed);

}  // namespace crit4::trees
