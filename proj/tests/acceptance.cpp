// One PASS/FAIL line per criterion.
//   acceptance [--only N] [--out DIR] [--threads T]

#include "crit4/suite.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

int main(int argc, char** argv) {
    int only = 0, threads = 1;
    std::filesystem::path out = "acceptance_out";
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--out") && i + 1 < argc) out = argv[++i];
        else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) threads = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: acceptance [--only N] [--out DIR] [--threads T]\n");
            return 1;
        }
    }
    bool all = true;
    for (int n = 1; n <= crit4::suite::kCriteria; ++n) {
        if (only && n != only) continue;
        auto r = crit4::suite::run_criterion(n, out, threads);
        std::printf("criterion %2d: %s  (%.1f s)\n%s", n, r.pass ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
        std::fflush(stdout);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
