#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "sbmiqp/bench.hpp"

using namespace sbmiqp;

namespace {

int usage() {
    std::cerr << "usage: sbmiqp-oracle <target>\n"
                 "  ocp:N                 dwell-pruned enumeration of the switched OCP\n"
                 "  tutorial              integer-grid enumeration of the tutorial problem\n"
                 "  nonconvex1d           integer-grid enumeration of the quartic problem\n"
                 "  random:SEED[:NX:NY]   enumeration of a seeded random convex MINLP\n";
    return 1;
}

void report(double objective, const Eigen::VectorXd& y, double seconds) {
    std::printf("objective: %.10f\n", objective);
    std::printf("y:");
    for (int i = 0; i < y.size(); ++i) std::printf(" %lld", (long long)std::llround(y[i]));
    std::printf("\ntime: %.3f s\n", seconds);
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) return usage();
    const std::string target = argv[1];
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        if (target.rfind("ocp:", 0) == 0) {
            OcpSpec spec;
            spec.N = std::stoi(target.substr(4));
            const BruteForceResult res = brute_force_ocp(spec);
            std::printf("objective: %.10f\n", res.objective);
            std::printf("u:");
            for (int u : res.u) std::printf(" %d", u);
            std::printf("\nnodes: %lld\ntime: %.3f s\n", (long long)res.nodes, elapsed());
            return 0;
        }
        ModelMinlp model;
        if (target == "tutorial") {
            model = tutorial_problem();
        } else if (target == "nonconvex1d") {
            model = nonconvex_integer_problem();
        } else if (target.rfind("random:", 0) == 0) {
            unsigned seed = 0;
            int nx = 2, ny = 2;
            if (std::sscanf(target.c_str(), "random:%u:%d:%d", &seed, &nx, &ny) < 1)
                return usage();
            model = random_convex_minlp(seed, nx, ny);
        } else {
            return usage();
        }
        Eigen::VectorXd best_y;
        const double obj = enumerate_minlp(model, &best_y);
        if (!std::isfinite(obj)) {
            std::printf("objective: inf (no feasible integer assignment)\n");
            return 2;
        }
        report(obj, best_y, elapsed());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
