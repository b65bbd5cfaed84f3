// crit4: command-line front end.
//
//   crit4 [--config FILE] [--seed N] [--out DIR] [--threads N] <subcommand> [--param value ...]
//
// Config files are JSON: {"subcommand": ..., "seed": ..., "output_dir": ..., "threads": ...,
// "params": {...}}. Command-line values win over the file. Exit codes: 0 ok, 1 usage,
// 2 statistical check failed, 3 numerical failure.

#include "crit4/branching.hpp"
#include "crit4/constants.hpp"
#include "crit4/coupling.hpp"
#include "crit4/csv.hpp"
#include "crit4/ode.hpp"
#include "crit4/offcritical.hpp"
#include "crit4/series.hpp"
#include "crit4/suite.hpp"
#include "crit4/tauberian.hpp"
#include "crit4/trees.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <variant>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using crit4::csv::Table;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- parameter tables ---------------------------------------------------------

enum class Kind { Num, Int, Str, Bool, List };

struct ParamSpec {
    std::string name;
    Kind kind;
    std::string def;  // default in command-line syntax
    std::string help;
};

const std::map<std::string, std::vector<ParamSpec>>& param_specs() {
    static const std::map<std::string, std::vector<ParamSpec>> specs = {
        {"ode",
         {{"family", Kind::Str, "g", "g | h_bvp | h_tail"},
          {"lambda", Kind::Num, "0.5", "initial slope is -lambda (family g)"},
          {"x_max", Kind::Num, "50", "integration horizon (family g)"},
          {"L", Kind::Num, "5", "right end of the BVP (family h_bvp)"},
          {"h0", Kind::Num, "1", "h(0) for the BVP"},
          {"x_start", Kind::Num, "200", "seed point of the tail (family h_tail)"},
          {"n_terms", Kind::Int, "8", "expansion terms for the tail seed"},
          {"spacing", Kind::Num, "0.1", "output grid spacing"},
          {"rel_tol", Kind::Num, "1e-10", ""},
          {"abs_tol", Kind::Num, "1e-14", ""},
          {"max_step", Kind::Num, "1", ""}}},
        {"constants",
         {{"quantity", Kind::Str, "c_lambda", "c_lambda | lambda_c | threshold | truncation"},
          {"lambda", Kind::Num, "0.5", ""},
          {"x0", Kind::Num, "1", "lower end of the integral formula"},
          {"x_max", Kind::Num, "1000", "horizon for c_lambda"},
          {"x_eval", Kind::Num, "1000", "evaluation point for lambda_c"},
          {"lambda_min", Kind::Num, "1", ""},
          {"lambda_max", Kind::Num, "5", ""},
          {"lambda_step", Kind::Num, "0.02", ""},
          {"lo", Kind::Num, "8", "threshold bracket"},
          {"hi", Kind::Num, "14", "threshold bracket"},
          {"width", Kind::Num, "0.05", "threshold bracket width"},
          {"C", Kind::Num, "9.2301", "constant slot for truncation"},
          {"x", Kind::Num, "20", "evaluation point for truncation"},
          {"n_max", Kind::Int, "12", "terms for truncation"}}},
        {"series",
         {{"family", Kind::Str, "P", "P | Q"}, {"n", Kind::Int, "3", "highest order"}}},
        {"hitting",
         {{"d", Kind::Int, "5", "dimension, not 4"},
          {"s", Kind::Num, "1", "generating-function argument in (0,1]"},
          {"r_min", Kind::Num, "3", ""},
          {"r_max", Kind::Num, "1000", ""},
          {"points", Kind::Int, "40", "log-spaced radii"}}},
        {"simulate",
         {{"task", Kind::Str, "pioneers", "pioneers | identity | invariance | thick"},
          {"replicas", Kind::Int, "10000", ""},
          {"mode", Kind::Str, "radial", "radial | cartesian"},
          {"dt", Kind::Num, "0.01", "step floor next to a sphere"},
          {"start", Kind::Num, "2", "pioneers: start radius"},
          {"target", Kind::Num, "1", "pioneers: counting radius"},
          {"kill", Kind::Num, "4", "pioneers: killing radius (0 = none)"},
          {"count_outer", Kind::Bool, "false", "pioneers: count at the outer sphere"},
          {"lambda", Kind::Num, "0.5", "identity"},
          {"x", Kind::Num, "3", "identity"},
          {"L", Kind::Num, "6", "identity"},
          {"s", Kind::Num, "0.5", "invariance"},
          {"y", Kind::Num, "0.5", "invariance: start as a fraction of R"},
          {"R1", Kind::Num, "8", "invariance"},
          {"R2", Kind::Num, "16", "invariance"},
          {"R_list", Kind::List, "16,32,64", "thick"},
          {"a", Kind::Num, "1", "thick"}}},
        {"tree",
         {{"task", Kind::Str, "hs", "hs | coupling | sample"},
          {"n", Kind::List, "257,1025,4097", "sizes (odd)"},
          {"replicas", Kind::Int, "100", ""},
          {"increments", Kind::Str, "gaussian", "gaussian | lattice"},
          {"condition", Kind::Str, "size", "sample: none | size | survive"}}},
        {"tauberian",
         {{"mean", Kind::Num, "1", "exponential law mean"},
          {"T", Kind::Num, "5", ""},
          {"a", Kind::Num, "0.3", ""},
          {"delta", Kind::Num, "0.5", ""},
          {"c", Kind::Num, "0.5", ""},
          {"C", Kind::Num, "1.5", ""},
          {"samples", Kind::Int, "1000000", ""}}},
        {"report", {{"suite", Kind::Str, "quick", "quick | full"}}},
    };
    return specs;
}

class Params {
  public:
    std::map<std::string, std::string> raw;  // command-line syntax
    std::map<std::string, Kind> kinds;

    double num(const std::string& k) const {
        try {
            size_t pos;
            double v = std::stod(raw.at(k), &pos);
            if (pos != raw.at(k).size()) throw std::invalid_argument(k);
            return v;
        } catch (const std::logic_error&) {
            throw UsageError("parameter " + k + ": not a number: " + raw.at(k));
        }
    }
    long long integer(const std::string& k) const {
        double v = num(k);
        if (v != std::floor(v)) throw UsageError("parameter " + k + ": not an integer: " + raw.at(k));
        return static_cast<long long>(v);
    }
    std::uint64_t count(const std::string& k) const {
        long long v = integer(k);
        if (v < 1) throw UsageError("parameter " + k + " must be positive");
        return static_cast<std::uint64_t>(v);
    }
    const std::string& str(const std::string& k) const { return raw.at(k); }
    bool flag(const std::string& k) const {
        const auto& v = raw.at(k);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw UsageError("parameter " + k + ": expected true or false, got " + v);
    }
    std::vector<double> list(const std::string& k) const {
        std::vector<double> out;
        std::stringstream ss(raw.at(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::logic_error&) {
                throw UsageError("parameter " + k + ": bad list entry '" + item + "'");
            }
        }
        if (out.empty()) throw UsageError("parameter " + k + ": empty list");
        return out;
    }
    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : raw) {
            switch (kinds.at(k)) {
                case Kind::Num: j[k] = num(k); break;
                case Kind::Int: j[k] = integer(k); break;
                case Kind::Bool: j[k] = flag(k); break;
                case Kind::List: j[k] = list(k); break;
                case Kind::Str: j[k] = v; break;
            }
        }
        return j;
    }
};

// ---- config file ----------------------------------------------------------------

int line_of_offset(const std::string& text, size_t off) {
    off = std::min(off, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + off, '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
    auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

struct FileConfig {
    std::string path, text;
    json doc = json::object();

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        int line = line_of_key(text, key);
        throw UsageError(path + ":" + (line ? std::to_string(line) : "?") + ": " + msg);
    }
};

FileConfig load_config(const std::string& path) {
    FileConfig fc;
    fc.path = path;
    std::ifstream in(path);
    if (!in) throw UsageError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    fc.text = ss.str();
    try {
        fc.doc = json::parse(fc.text);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ":" + std::to_string(line_of_offset(fc.text, e.byte ? e.byte - 1 : 0)) +
                         ": malformed JSON (" + e.what() + ")");
    }
    if (!fc.doc.is_object()) throw UsageError(path + ":1: top level must be an object");
    for (const auto& [k, v] : fc.doc.items()) {
        if (k != "subcommand" && k != "seed" && k != "output_dir" && k != "threads" && k != "params")
            fc.fail(k, "unknown key '" + k + "'");
    }
    if (fc.doc.contains("subcommand") && !fc.doc["subcommand"].is_string())
        fc.fail("subcommand", "'subcommand' must be a string");
    if (fc.doc.contains("seed") && !fc.doc["seed"].is_number_unsigned())
        fc.fail("seed", "'seed' must be a non-negative integer");
    if (fc.doc.contains("threads") && !fc.doc["threads"].is_number_unsigned())
        fc.fail("threads", "'threads' must be a non-negative integer");
    if (fc.doc.contains("output_dir") && !fc.doc["output_dir"].is_string())
        fc.fail("output_dir", "'output_dir' must be a string");
    if (fc.doc.contains("params") && !fc.doc["params"].is_object())
        fc.fail("params", "'params' must be an object");
    return fc;
}

std::string json_to_param(const FileConfig& fc, const std::string& key, const json& v, Kind kind) {
    auto bad = [&](const char* want) { fc.fail(key, "parameter '" + key + "' must be " + want); };
    switch (kind) {
        case Kind::Num:
        case Kind::Int:
            if (!v.is_number()) bad(kind == Kind::Int ? "an integer" : "a number");
            return v.dump();
        case Kind::Bool:
            if (!v.is_boolean()) bad("a boolean");
            return v.get<bool>() ? "true" : "false";
        case Kind::Str:
            if (!v.is_string()) bad("a string");
            return v.get<std::string>();
        case Kind::List: {
            if (v.is_number()) return v.dump();
            if (!v.is_array() || v.empty()) bad("a non-empty array of numbers");
            std::string s;
            for (const auto& e : v) {
                if (!e.is_number()) bad("a non-empty array of numbers");
                s += (s.empty() ? "" : ",") + e.dump();
            }
            return s;
        }
    }
    return {};
}

// ---- outputs --------------------------------------------------------------------

struct Run {
    std::string sub;
    Params p;
    std::uint64_t seed = 1;
    fs::path out = ".";
    int threads = 1;
    std::vector<std::string> files;
    json summary = json::object();

    void write(const std::string& name, const Table& t) {
        t.write(out / name);
        files.push_back(name);
    }
    // two-column whitespace data plus a gnuplot stub
    void plot(const std::string& stem, const std::vector<double>& x, const std::vector<double>& y,
              const std::string& xl, const std::string& yl, bool logx = false) {
        std::ofstream d(out / (stem + ".dat"));
        d << "# " << xl << " " << yl << "\n";
        for (size_t i = 0; i < x.size(); ++i) d << Table::cell(x[i]) << " " << Table::cell(y[i]) << "\n";
        std::ofstream g(out / (stem + ".gp"));
        g << "set xlabel '" << xl << "'\nset ylabel '" << yl << "'\n"
          << (logx ? "set logscale x\n" : "") << "plot '" << stem << ".dat' using 1:2 with lines notitle\n";
        files.push_back(stem + ".dat");
        files.push_back(stem + ".gp");
    }
};

crit4::ode::SolveConfig solve_cfg(const Params& p) {
    crit4::ode::SolveConfig c;
    c.rel_tol = p.num("rel_tol");
    c.abs_tol = p.num("abs_tol");
    c.max_step = p.num("max_step");
    return c;
}

void write_traj(Run& r, const crit4::ode::Trajectory& t, double spacing) {
    Table tab({"x", "value", "d1", "d2"});
    std::vector<double> xs, ys;
    for (const auto& pt : t.sample(spacing)) {
        tab.row(pt.x, pt.g, pt.gp, pt.gpp);
        xs.push_back(pt.x);
        ys.push_back(pt.g);
    }
    r.write("ode.csv", tab);
    r.plot("ode", xs, ys, "x", "value");
}

// ---- subcommands ----------------------------------------------------------------

void cmd_ode(Run& r) {
    using namespace crit4::ode;
    const auto& p = r.p;
    auto cfg = solve_cfg(p);
    const double spacing = p.num("spacing");
    if (!(spacing > 0)) throw UsageError("spacing must be positive");
    const std::string fam = p.str("family");
    if (fam == "g") {
        auto t = solve_g_lambda({p.num("lambda"), p.num("x_max")}, cfg);
        write_traj(r, t, spacing);
        r.summary["blowup_at"] = t.blowup_at ? json(*t.blowup_at) : json(nullptr);
        r.summary["max_residual"] = t.max_residual(spacing);
        try {
            auto pm = phase_markers(t);
            r.summary["x0"] = pm.x0;
            r.summary["x1"] = pm.x1;
        } catch (const HorizonTooShort& e) {
            r.summary["phase_markers"] = std::string("unavailable: ") + e.what();
        }
    } else if (fam == "h_bvp") {
        auto t = solve_h_bvp(p.num("h0"), p.num("L"), cfg);
        write_traj(r, t, spacing);
        r.summary["h_prime_0"] = t.gp.front();
    } else if (fam == "h_tail") {
        auto ht = solve_h_tail(p.num("x_start"), static_cast<int>(p.integer("n_terms")), cfg);
        write_traj(r, ht.traj, spacing);
        r.summary["valid_from"] = ht.valid_from;
        r.summary["reached_zero"] = ht.reached_zero;
    } else {
        throw UsageError("family must be g, h_bvp or h_tail");
    }
}

void cmd_constants(Run& r) {
    using namespace crit4::constants;
    const auto& p = r.p;
    const std::string q = p.str("quantity");
    if (q == "c_lambda") {
        auto e = estimate_c_lambda(p.num("lambda"), p.num("x0"), p.num("x_max"), precise_config());
        double fit = c_lambda_tail_fit(p.num("lambda"), p.num("x_max"), precise_config());
        Table t({"lambda", "integral_value", "expansion_constant", "tail_fit", "quadrature_error"});
        t.row(e.lambda, e.value, e.expansion_constant, fit, e.quadrature_error);
        r.write("constants.csv", t);
        r.summary["expansion_constant"] = e.expansion_constant;
        r.summary["tail_fit"] = fit;
    } else if (q == "lambda_c") {
        std::vector<double> grid;
        const double lo = p.num("lambda_min"), hi = p.num("lambda_max"), st = p.num("lambda_step");
        if (!(st > 0 && hi >= lo)) throw UsageError("need lambda_step > 0 and lambda_max >= lambda_min");
        for (long i = 0; lo + i * st <= hi + 1e-12; ++i) grid.push_back(lo + i * st);
        auto res = estimate_lambda_c(p.num("x_eval"), grid, crit4::ode::SolveConfig{});
        Table t({"lambda", "objective"});
        for (size_t i = 0; i < res.lambdas.size(); ++i) t.row(res.lambdas[i], res.objective[i]);
        r.write("constants.csv", t);
        r.plot("lambda_c", res.lambdas, res.objective, "lambda", "objective");
        r.summary["argmax"] = res.argmax;
        r.summary["peak"] = res.peak;
    } else if (q == "threshold") {
        auto th = crit4::ode::positivity_threshold(p.num("lo"), p.num("hi"), p.num("width"),
                                                   crit4::ode::SolveConfig{});
        Table t({"threshold", "bracket_width"});
        t.row(th.value, th.bracket_width);
        r.write("constants.csv", t);
        r.summary["threshold"] = th.value;
    } else if (q == "truncation") {
        const double C = p.num("C"), x = p.num("x");
        const int n_max = static_cast<int>(p.integer("n_max"));
        auto tr = crit4::ode::solve_g_lambda({p.num("lambda"), x}, crit4::ode::SolveConfig{});
        auto rows = truncation_table(C, x, n_max, tr.at(x).g);
        Table t({"n", "partial_sum", "abs_error", "last_term"});
        for (const auto& row : rows) t.row(row.n, row.partial_sum, row.abs_error, row.last_term);
        r.write("constants.csv", t);
        r.summary["optimal_truncation"] = optimal_truncation(C, x, n_max);
    } else {
        throw UsageError("quantity must be c_lambda, lambda_c, threshold or truncation");
    }
}

void cmd_series(Run& r) {
    using namespace crit4::series;
    const std::string fam = r.p.str("family");
    const long long n = r.p.integer("n");
    if (n < 1 || n > 200) throw UsageError("n must lie in [1, 200]");
    SeriesFamily f;
    if (fam == "P") f = gen_P(static_cast<int>(n));
    else if (fam == "Q") f = gen_Q(static_cast<int>(n));
    else throw UsageError("family must be P or Q");
    std::cout << dump(f);
    Table t({"n", "polynomial"});
    for (int k = 1; k <= n; ++k) t.row(k, f.at(k).str());
    r.write("series.csv", t);
    r.summary["consistent_order"] = consistent_order(f);
}

void cmd_hitting(Run& r) {
    using namespace crit4::offcritical;
    const auto& p = r.p;
    const int d = static_cast<int>(p.integer("d"));
    const double s = p.num("s"), lo = p.num("r_min"), hi = p.num("r_max");
    const long long n = p.integer("points");
    if (d < 1 || d == 4) throw UsageError("d must be a positive dimension other than 4");
    if (!(lo > 0 && hi > lo) || n < 2) throw UsageError("need 0 < r_min < r_max and points >= 2");
    Table t({"r", "v", "dv", "d2v", "r2v", "residual"});
    std::vector<double> xs, ys;
    for (long long i = 0; i < n; ++i) {
        double rr = lo * std::pow(hi / lo, double(i) / double(n - 1));
        auto v = hitting_series_full(d, s, rr);
        t.row(rr, v.v, v.dv, v.d2v, rr * rr * v.v, v.d2v + (d - 1) / rr * v.dv - v.v * v.v);
        xs.push_back(rr);
        ys.push_back(rr * rr * v.v);
    }
    r.write("hitting.csv", t);
    r.plot("hitting", xs, ys, "r", "r^2 v", true);
    auto par = params_of(d);
    r.summary["beta"] = par.beta;
}

crit4::branching::SimConfig sim_cfg(const Run& r) {
    crit4::branching::SimConfig c;
    c.seed = r.seed;
    c.threads = r.threads;
    c.n_replicas = r.p.count("replicas");
    c.dt = r.p.num("dt");
    const auto& m = r.p.str("mode");
    if (m == "radial") c.mode = crit4::branching::Mode::RadialBessel;
    else if (m == "cartesian") c.mode = crit4::branching::Mode::FullCartesian;
    else throw UsageError("mode must be radial or cartesian");
    return c;
}

void write_tally(Run& r, const crit4::branching::PioneerTally& t) {
    Table h({"N", "replicas"});
    for (const auto& [k, c] : t.counts) h.row((unsigned long long)k, (unsigned long long)c);
    r.write("simulate_histogram.csv", h);
}

void cmd_simulate(Run& r) {
    namespace br = crit4::branching;
    const auto& p = r.p;
    const std::string task = p.str("task");
    if (task == "pioneers") {
        br::SphereGeometry g;
        g.start_radius = p.num("start");
        g.target_radius = p.num("target");
        if (p.num("kill") > 0) g.kill_radius = p.num("kill");
        g.count_outer = p.flag("count_outer");
        auto t = br::run_bbm_pioneers(g, sim_cfg(r));
        write_tally(r, t);
        auto m = t.mean_count(), h = t.hit_indicator_mean();
        Table s({"mean_count", "mean_stderr", "hit_prob", "hit_stderr", "particle_steps"});
        s.row(m.value, m.stderr_, h.value, h.stderr_, (unsigned long long)t.particle_steps);
        r.write("simulate.csv", s);
        if (g.kill_radius && !g.count_outer)
            r.summary["harmonic_first_moment"] = br::harmonic_first_moment(g.start_radius, 1.0 * *g.target_radius,
                                                                           *g.kill_radius);
    } else if (task == "identity") {
        auto rep = br::generating_identity_check(p.num("lambda"), p.num("x"), p.num("L"), sim_cfg(r));
        write_tally(r, rep.tally);
        Table s({"lambda", "x", "L", "s", "mc_value", "mc_stderr", "ode_value", "allowance", "pass"});
        s.row(rep.lambda, rep.x, rep.L, rep.s, rep.mc_value, rep.mc_stderr, rep.ode_value, rep.allowance, rep.pass);
        r.write("simulate.csv", s);
        if (!rep.pass) throw CheckFailed("identity check outside 3 sigma + allowance");
    } else if (task == "invariance") {
        auto rep = br::scale_invariance_check(p.num("s"), p.num("y"), p.num("R1"), p.num("R2"), sim_cfg(r));
        Table s({"s", "value1", "err1", "value2", "err2", "ess1", "ess2", "ks", "pass"});
        s.row(rep.s, rep.value1, rep.err1, rep.value2, rep.err2, rep.ess1, rep.ess2, rep.ks_statistic, rep.pass);
        r.write("simulate.csv", s);
        if (rep.outside_band) throw CheckFailed("effective sample size below 100");
        if (!rep.pass) throw CheckFailed("scale invariance rejected at 3 sigma");
    } else if (task == "thick") {
        std::vector<int> Rs;
        for (double v : p.list("R_list")) Rs.push_back(static_cast<int>(v));
        auto s = br::thick_point_slope(Rs, p.num("a"), static_cast<int>(p.count("replicas")), r.seed, r.threads);
        Table t({"R", "mean_thick_count", "stderr"});
        for (size_t i = 0; i < s.R.size(); ++i) t.row(s.R[i], s.mean_count[i], s.count_stderr[i]);
        r.write("simulate.csv", t);
        r.summary["slope"] = s.slope;
    } else {
        throw UsageError("task must be pioneers, identity, invariance or thick");
    }
}

void cmd_tree(Run& r) {
    using namespace crit4::trees;
    const auto& p = r.p;
    const std::string task = p.str("task");
    std::vector<std::uint64_t> sizes;
    for (double v : p.list("n")) {
        if (!(v >= 1 && v == std::floor(v))) throw UsageError("tree sizes must be positive integers");
        sizes.push_back(static_cast<std::uint64_t>(v));
    }
    const int reps = static_cast<int>(p.count("replicas"));
    if (task == "hs") {
        auto rows = hs_statistics(sizes, reps, r.seed);
        Table t({"n", "replicas", "mean_ratio", "q10", "q50", "q90", "mean_H"});
        for (const auto& x : rows) t.row((unsigned long long)x.n, x.replicas, x.mean_ratio, x.q10, x.q50, x.q90, x.mean_H);
        r.write("tree.csv", t);
    } else if (task == "coupling") {
        const auto& inc = p.str("increments");
        crit4::coupling::Increments kind;
        if (inc == "gaussian") kind = crit4::coupling::Increments::GaussianSubordinated;
        else if (inc == "lattice") kind = crit4::coupling::Increments::LatticeNN;
        else throw UsageError("increments must be gaussian or lattice");
        auto rows = crit4::coupling::coupling_trend(sizes, reps, kind, r.seed);
        Table t({"n", "median_sup", "median_sup_over_log2", "median_bound_proxy"});
        for (const auto& x : rows) t.row((unsigned long long)x.n, x.median_sup, x.median_scaled, x.median_proxy);
        r.write("tree.csv", t);
    } else if (task == "sample") {
        SampleRequest req;
        const auto& c = p.str("condition");
        if (c == "none") req.condition = Condition::None;
        else if (c == "size") req.condition = Condition::Size;
        else if (c == "survive") req.condition = Condition::Survive;
        else throw UsageError("condition must be none, size or survive");
        req.n = sizes.front();
        Table t({"replica", "vertices", "depth", "leaves", "horton_strahler"});
        for (int i = 0; i < reps; ++i) {
            auto tr = sample_bgw(req, r.seed, static_cast<std::uint64_t>(i));
            t.row(i, tr.size(), tr.depth(), tr.leaves(), horton_strahler(tr));
            if (i == 0) {
                std::ofstream f(r.out / "tree_0.txt");
                tr.write(f);
                r.files.push_back("tree_0.txt");
            }
        }
        r.write("tree.csv", t);
    } else {
        throw UsageError("task must be hs, coupling or sample");
    }
}

void cmd_tauberian(Run& r) {
    using namespace crit4::tauberian;
    const auto& p = r.p;
    auto law = SampleableLaw::exponential(p.num("mean"));
    BandSpec spec{p.num("c"), p.num("C"), p.num("T"), p.num("delta")};
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    TheoremReport rep;
    try {
        rep = verify_theorem(law, p.num("a"), spec, p.count("samples"), r.seed);
    } catch (const BandViolation& e) {
        throw CheckFailed(e.what());
    } catch (const Unverifiable& e) {
        throw CheckFailed(e.what());
    }
    Table t({"T", "a", "delta", "bound", "estimate", "ci_low", "ci_high", "exact", "method", "tilt_s", "pass"});
    t.row(rep.T, rep.a, rep.delta, rep.bound, rep.estimate, rep.ci_low, rep.ci_high,
          rep.exact ? Table::cell(*rep.exact) : std::string(), rep.method, rep.tilt_s, rep.pass);
    r.write("tauberian.csv", t);
    if (!rep.pass) throw CheckFailed("lower confidence limit does not exceed the bound");
}

void cmd_report(Run& r) {
    const auto& s = r.p.str("suite");
    std::vector<int> ids;
    if (s == "quick") ids = crit4::suite::quick_criteria();
    else if (s == "full")
        for (int i = 1; i <= crit4::suite::kCriteria; ++i) ids.push_back(i);
    else throw UsageError("suite must be quick or full");
    Table t({"criterion", "pass"});
    bool all = true;
    json timing = json::object();
    for (int id : ids) {
        auto res = crit4::suite::run_criterion(id, r.out / "acceptance", r.threads);
        std::cout << "criterion " << id << ": " << (res.pass ? "PASS" : "FAIL") << "\n" << res.detail << std::flush;
        t.row(id, res.pass);
        timing[std::to_string(id)] = res.seconds;
        all = all && res.pass;
    }
    r.write("report.csv", t);
    r.summary["criterion_seconds"] = timing;
    if (!all) throw CheckFailed("at least one criterion failed");
}

const std::map<std::string, void (*)(Run&)>& commands() {
    static const std::map<std::string, void (*)(Run&)> c = {
        {"ode", cmd_ode},         {"constants", cmd_constants}, {"series", cmd_series},
        {"hitting", cmd_hitting}, {"simulate", cmd_simulate},   {"tree", cmd_tree},
        {"tauberian", cmd_tauberian}, {"report", cmd_report},
    };
    return c;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crit4: critical branching in four dimensions"};
    app.require_subcommand(0, 1);
    app.fallthrough();  // global flags may follow the subcommand
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = -1;
    app.add_option("--config", config_path, "JSON run configuration");
    auto* seed_opt = app.add_option("--seed", seed, "64-bit seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
    app.set_version_flag("--version", kVersion);

    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, specs] : param_specs()) {
        static const std::map<std::string, std::string> about = {
            {"ode", "solve for g_lambda or the h branch on a grid"},
            {"constants", "C_lambda, lambda_c, positivity threshold, truncated series"},
            {"series", "asymptotic polynomials P_n, Q_n"},
            {"hitting", "off-critical radial hitting profile in dimension d"},
            {"simulate", "branching Brownian motion estimators"},
            {"tree", "BGW trees, highways and lattice coupling"},
            {"tauberian", "tilted estimates of P(N in [cT, CT])"},
            {"report", "run acceptance criteria"},
        };
        auto* sub = app.add_subcommand(name, about.at(name));
        subs[name] = sub;
        for (const auto& s : specs)
            sub->add_option("--" + s.name, given[name][s.name], s.help + " [default " + s.def + "]");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    Run run;
    const std::string started = utc_now();
    auto t0 = std::chrono::steady_clock::now();
    try {
        FileConfig fc;
        if (!config_path.empty()) fc = load_config(config_path);
        std::string sub;
        for (const auto& [name, app_sub] : subs)
            if (app_sub->parsed()) sub = name;
        if (fc.doc.contains("subcommand")) {
            std::string fsub = fc.doc["subcommand"];
            if (!param_specs().count(fsub)) fc.fail("subcommand", "unknown subcommand '" + fsub + "'");
            if (!sub.empty() && sub != fsub)
                throw UsageError("config is for '" + fsub + "' but '" + sub + "' was requested");
            sub = fsub;
        }
        if (sub.empty()) throw UsageError("no subcommand given; see --help");
        run.sub = sub;

        const auto& specs = param_specs().at(sub);
        for (const auto& s : specs) {
            run.p.raw[s.name] = s.def;
            run.p.kinds[s.name] = s.kind;
        }
        if (fc.doc.contains("params")) {
            for (const auto& [k, v] : fc.doc["params"].items()) {
                if (!run.p.kinds.count(k)) fc.fail(k, "unknown parameter '" + k + "' for " + sub);
                run.p.raw[k] = json_to_param(fc, k, v, run.p.kinds[k]);
            }
        }
        for (const auto& s : specs)
            if (subs[sub]->count("--" + s.name)) run.p.raw[s.name] = given[sub][s.name];

        run.seed = *seed_opt ? seed : fc.doc.value("seed", std::uint64_t{1});
        run.out = !out_dir.empty() ? fs::path(out_dir) : fs::path(fc.doc.value("output_dir", std::string("out")));
        int th = threads >= 0 ? threads : fc.doc.value("threads", 1);
        run.threads = th == 0 ? std::max(1u, std::thread::hardware_concurrency()) : th;
        run.p.to_json();  // type-check every parameter before any work starts
        fs::create_directories(run.out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    int code = 0;
    std::string status = "ok";
    try {
        commands().at(run.sub)(run);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        code = 2;
        status = std::string("check failed: ") + e.what();
    } catch (const crit4::branching::StatisticalFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        code = 2;
        status = std::string("check failed: ") + e.what();
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        code = 3;
        status = std::string("numerical failure: ") + e.what();
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // deterministic echo of the resolved configuration
    json cfg = {{"subcommand", run.sub}, {"seed", run.seed}, {"params", run.p.to_json()}};
    std::ofstream(run.out / (run.sub + ".config.json")) << cfg.dump(2) << "\n";
    // everything time-dependent lives here
    json meta = {{"version", kVersion}, {"subcommand", run.sub},       {"seed", run.seed},
                 {"threads", run.threads}, {"started_utc", started}, {"wall_seconds", wall},
                 {"status", status},       {"exit_code", code},        {"files", run.files},
                 {"summary", run.summary}};
    std::ofstream(run.out / (run.sub + ".meta.json")) << meta.dump(2) << "\n";
    std::cout << "seed " << run.seed << ", outputs in " << run.out.string() << "\n";
    for (const auto& [k, v] : run.summary.items()) std::cout << "  " << k << " = " << v.dump() << "\n";
    return code;
}
