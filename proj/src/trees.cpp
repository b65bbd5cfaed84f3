#include "crit4/trees.hpp"

#include "crit4/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace crit4::trees {

GenealogyTree::GenealogyTree(std::vector<int> parent) : parent_(std::move(parent)) {
    const int n = size();
    if (n == 0) throw InvalidTree("empty tree");
    if (parent_[0] != -1) throw InvalidTree("vertex 0 must be the root");
    children_.assign(n, {});
    for (int v = 1; v < n; ++v) {
        int p = parent_[v];
        if (p < 0 || p >= n || p == v) throw InvalidTree("bad parent index at vertex " + std::to_string(v));
        children_[p].push_back(v);
    }
    vdepth_.assign(n, -1);
    order_.reserve(n);
    order_.push_back(0);
    vdepth_[0] = 0;
    for (size_t i = 0; i < order_.size(); ++i) {
        int v = order_[i];
        for (int c : children_[v]) {
            vdepth_[c] = vdepth_[v] + 1;
            order_.push_back(c);
        }
    }
    if (static_cast<int>(order_.size()) != n) throw InvalidTree("tree is not connected to the root");
    for (int v = 0; v < n; ++v) {
        depth_ = std::max(depth_, vdepth_[v]);
        if (children_[v].empty()) ++leaves_;
    }
}

GenealogyTree GenealogyTree::path(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i - 1;
    return GenealogyTree(p);
}

GenealogyTree GenealogyTree::perfect_binary(int levels) {
    int n = (1 << levels) - 1;
    std::vector<int> p(n);
    p[0] = -1;
    for (int i = 1; i < n; ++i) p[i] = (i - 1) / 2;
    return GenealogyTree(p);
}

void GenealogyTree::write(std::ostream& os) const {
    for (int v = 0; v < size(); ++v) os << v << ' ' << parent_[v] << '\n';
}

GenealogyTree GenealogyTree::read(std::istream& is) {
    std::vector<std::pair<long, long>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        long a, b;
        std::string extra;
        if (!(ls >> a >> b) || (ls >> extra))
            throw InvalidTree("line " + std::to_string(lineno) + ": expected 'index parent'");
        rows.emplace_back(a, b);
    }
    std::vector<int> parent(rows.size(), -2);
    for (auto [a, b] : rows) {
        if (a < 0 || a >= long(rows.size()) || parent[a] != -2) throw InvalidTree("bad or repeated index");
        parent[a] = static_cast<int>(b);
    }
    return GenealogyTree(parent);
}

namespace {

struct ByteStep {
    std::array<int, 256> delta, minpref;
    ByteStep() {
        for (int b = 0; b < 256; ++b) {
            int s = 0, m = 1 << 20;
            for (int i = 0; i < 8; ++i) {
                s += ((b >> i) & 1) ? 1 : -1;
                m = std::min(m, s);
            }
            delta[b] = s;
            minpref[b] = m;
        }
    }
};
const ByteStep kBytes;

// Lukasiewicz walk: bit 1 = two children, bit 0 = leaf. Returns the total
// progeny, or 0 when it exceeds cap. Bits are taken LSB first from words.
std::uint64_t walk_size(Rng& rng, std::uint64_t cap, std::vector<std::uint64_t>& words) {
    words.clear();
    std::int64_t s = 1;
    std::uint64_t count = 0;
    for (;;) {
        std::uint64_t w = rng();
        words.push_back(w);
        for (int byte = 0; byte < 8; ++byte) {
            int b = static_cast<int>((w >> (8 * byte)) & 0xff);
            if (count + 8 <= cap && s + kBytes.minpref[b] > 0) {
                s += kBytes.delta[b];
                count += 8;
                continue;
            }
            for (int i = 0; i < 8; ++i) {
                s += ((b >> i) & 1) ? 1 : -1;
                ++count;
                if (s == 0) return count;
                if (count >= cap) return 0;
            }
        }
    }
}

GenealogyTree tree_from_bits(const std::vector<std::uint64_t>& words, std::uint64_t n) {
    std::vector<int> parent(n);
    std::vector<std::pair<int, int>> stack;  // vertex, children still to attach
    for (std::uint64_t i = 0; i < n; ++i) {
        int v = static_cast<int>(i);
        if (i == 0) {
            parent[0] = -1;
        } else {
            parent[v] = stack.back().first;
            if (--stack.back().second == 0) stack.pop_back();
        }
        if ((words[i / 64] >> (i % 64)) & 1) stack.emplace_back(v, 2);
    }
    return GenealogyTree(parent);
}

GenealogyTree grow_surviving(Rng& rng, std::uint64_t gens, std::uint64_t cap, bool& ok) {
    std::vector<int> parent{-1};
    std::vector<int> level{0}, next;
    std::uint64_t g = 0;
    while (!level.empty()) {
        next.clear();
        for (int v : level) {
            if (!rng.coin()) continue;
            for (int c = 0; c < 2; ++c) {
                parent.push_back(v);
                next.push_back(static_cast<int>(parent.size()) - 1);
            }
        }
        if (parent.size() > cap) throw std::runtime_error("tree exceeded the vertex cap");
        level.swap(next);
        ++g;
    }
    // level g-1 was the last nonempty one
    ok = g > gens;
    return GenealogyTree(parent);
}

}  // namespace

GenealogyTree sample_bgw(const SampleRequest& req, std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t* attempts_out) {
    Rng rng(seed, stream);
    std::vector<std::uint64_t> words;
    std::uint64_t attempts = 0;
    auto cap_error = [&]() {
        return AttemptCapReached("attempt cap reached; acceptance below " +
                                     std::to_string(1.0 / double(attempts)),
                                 1.0 / double(attempts));
    };
    switch (req.condition) {
        case Condition::None: {
            std::uint64_t n = walk_size(rng, req.max_vertices, words);
            if (n == 0) throw std::runtime_error("tree exceeded the vertex cap");
            if (attempts_out) *attempts_out = 1;
            return tree_from_bits(words, n);
        }
        case Condition::Size: {
            if (req.n == 0 || req.n % 2 == 0)
                throw std::invalid_argument("binary total progeny is odd; size " + std::to_string(req.n) +
                                            " is impossible");
            while (attempts < req.max_attempts) {
                ++attempts;
                if (walk_size(rng, req.n, words) == req.n) {
                    if (attempts_out) *attempts_out = attempts;
                    return tree_from_bits(words, req.n);
                }
            }
            throw cap_error();
        }
        case Condition::Survive: {
            while (attempts < req.max_attempts) {
                ++attempts;
                bool ok = false;
                GenealogyTree t = grow_surviving(rng, req.n, req.max_vertices, ok);
                if (ok) {
                    if (attempts_out) *attempts_out = attempts;
                    return t;
                }
            }
            throw cap_error();
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<int> horton_strahler_all(const GenealogyTree& t) {
    std::vector<int> h(t.size(), 1);
    const auto& order = t.bfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        const auto& ch = t.children(v);
        if (ch.empty()) continue;
        int best = 0, mult = 0;
        for (int c : ch) {
            if (h[c] > best) {
                best = h[c];
                mult = 1;
            } else if (h[c] == best) {
                ++mult;
            }
        }
        h[v] = best + (mult >= 2 ? 1 : 0);
    }
    return h;
}

int horton_strahler(const GenealogyTree& t) { return horton_strahler_all(t)[0]; }

HighwayDecomposition highways(const GenealogyTree& t) {
    const int n = t.size();
    HighwayDecomposition out;
    out.edge_path.assign(n, -1);
    std::vector<char> alive(n, 1);
    std::vector<int> live_children(n);
    for (int v = 0; v < n; ++v) live_children[v] = static_cast<int>(t.children(v).size());
    int remaining = n;
    std::vector<int> stack, leaves, removed;
    while (remaining > 0) {
        ++out.rounds;
        // current leaves in depth-first discovery order
        leaves.clear();
        stack.assign(1, 0);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (live_children[v] == 0) leaves.push_back(v);
            const auto& ch = t.children(v);
            for (auto it = ch.rbegin(); it != ch.rend(); ++it)
                if (alive[*it]) stack.push_back(*it);
        }
        removed.clear();
        for (int leaf : leaves) {
            std::vector<int> path{leaf};
            int v = leaf;
            while (t.parent(v) != -1 && live_children[t.parent(v)] == 1) {
                v = t.parent(v);
                path.push_back(v);
            }
            removed.insert(removed.end(), path.begin(), path.end());
            if (t.parent(v) != -1) path.push_back(t.parent(v));
            std::reverse(path.begin(), path.end());
            const int idx = static_cast<int>(out.paths.size());
            for (size_t i = 1; i < path.size(); ++i) out.edge_path[path[i]] = idx;
            out.paths.push_back(std::move(path));
            out.path_round.push_back(out.rounds);
        }
        for (int v : removed) {
            alive[v] = 0;
            --remaining;
        }
        for (int v : removed)
            if (t.parent(v) != -1 && alive[t.parent(v)]) --live_children[t.parent(v)];
    }
    return out;
}

HighwayAudit audit_highways(const GenealogyTree& t, const HighwayDecomposition& h) {
    HighwayAudit a{true, true, 0};
    const int n = t.size();
    std::vector<int> seen(n, 0);
    for (size_t k = 0; k < h.paths.size(); ++k) {
        const auto& p = h.paths[k];
        for (size_t i = 1; i < p.size(); ++i) {
            if (t.parent(p[i]) != p[i - 1]) a.monotone = false;
            if (h.edge_path[p[i]] != static_cast<int>(k)) a.edge_disjoint_cover = false;
            ++seen[p[i]];
        }
    }
    for (int v = 1; v < n; ++v)
        if (seen[v] != 1) a.edge_disjoint_cover = false;
    std::vector<int> used(n, 0);
    for (int v : t.bfs_order()) {
        int p = t.parent(v);
        if (p < 0) continue;
        used[v] = used[p] + ((t.parent(p) < 0 || h.edge_path[v] != h.edge_path[p]) ? 1 : 0);
    }
    for (int v = 0; v < n; ++v)
        if (t.children(v).empty()) a.max_paths_per_geodesic = std::max(a.max_paths_per_geodesic, used[v]);
    if (n == 1) a.max_paths_per_geodesic = 1;
    return a;
}

namespace {
void dyck(int up, int down, int n, std::string& w, std::vector<std::string>& out) {
    if (up == n && down == n) {
        out.push_back(w);
        return;
    }
    if (up < n) {
        w.push_back('(');
        dyck(up + 1, down, n, w, out);
        w.pop_back();
    }
    if (down < up) {
        w.push_back(')');
        dyck(up, down + 1, n, w, out);
        w.pop_back();
    }
}
}  // namespace

std::vector<GenealogyTree> enumerate_trees(int n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::vector<std::string> words;
    std::string w;
    dyck(0, 0, n - 1, w, words);
    std::vector<GenealogyTree> out;
    out.reserve(words.size());
    for (const auto& word : words) {
        std::vector<int> parent{-1};
        int cur = 0;
        for (char ch : word) {
            if (ch == '(') {
                parent.push_back(cur);
                cur = static_cast<int>(parent.size()) - 1;
            } else {
                cur = parent[cur];
            }
        }
        out.emplace_back(parent);
    }
    return out;
}

std::vector<HsRow> hs_statistics(const std::vector<std::uint64_t>& n_grid, int replicas,
                                 std::uint64_t seed) {
    std::vector<HsRow> rows;
    for (std::uint64_t n : n_grid) {
        if (n < 3) throw std::invalid_argument("hs_statistics needs n >= 3");
        SampleRequest req;
        req.condition = Condition::Size;
        req.n = n;
        std::vector<double> ratio(replicas);
        double sumH = 0;
        for (int r = 0; r < replicas; ++r) {
            auto t = sample_bgw(req, seed, (n << 24) + std::uint64_t(r));
            int H = horton_strahler(t);
            sumH += H;
            ratio[r] = H / std::log2(double(n));
        }
        double mean = 0;
        for (double x : ratio) mean += x;
        mean /= replicas;
        std::sort(ratio.begin(), ratio.end());
        auto q = [&](double p) { return ratio[static_cast<size_t>(std::floor(p * (replicas - 1)))]; };
        rows.push_back({n, replicas, mean, q(0.1), q(0.5), q(0.9), sumH / replicas});
    }
    return rows;
}

}  // namespace crit4::trees
