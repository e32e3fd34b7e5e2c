// Experiment driver: n_B / W sweeps to CSV, or a single debug scenario when a
// placement file is given.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "czb/cli.hpp"
#include "czb/errors.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kIoError = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-zone Byzantine broadcast: Monte Carlo sweeps and scenario debugging"};
    app.set_config("--config", "", "Key-value configuration file; command-line flags take precedence");

    std::string topology = "torus";
    int side = 100;
    std::string order = "3";
    std::string byz = "0";
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::string out;
    bool trace = false;
    double crosscheck = 0.01;
    std::string pair_mode = "all";
    std::string placement;
    std::uint64_t budget = 10'000;
    unsigned threads = 0;

    app.add_option("--topology", topology, "torus or grid")->capture_default_str();
    app.add_option("--n", side, "Side length N")->capture_default_str();
    app.add_option("--order", order, "Order(s) W, comma separated; 'explorer' for the baseline")
        ->capture_default_str();
    app.add_option("--byz", byz, "Byzantine counts: list (0,5,10) or range (5..9, 0..100:10)")
        ->capture_default_str();
    app.add_option("--trials", trials, "Trials per point")->capture_default_str();
    app.add_option("--seed", seed, "Master seed")->capture_default_str();
    app.add_option("--out", out, "CSV output (sweep) or trace output (scenario)");
    app.add_flag("--trace", trace, "Export simulation traces as line-delimited JSON");
    app.add_option("--crosscheck", crosscheck, "Fraction of trials re-run in the simulator")
        ->capture_default_str();
    app.add_option("--pair-mode", pair_mode, "all or correct-only")->capture_default_str();
    app.add_option("--placement", placement, "Byzantine placement file (i,j per line): run one scenario");
    app.add_option("--budget", budget, "Cover search backtracking budget")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (!placement.empty()) {
            czb::ScenarioSpec spec;
            spec.kind = czb::parse_topology(topology);
            spec.side = side;
            const auto orders = czb::parse_orders(order);
            if (orders.size() != 1 || !orders.front()) {
                throw czb::InvalidParameter("cli: a scenario needs exactly one integer --order");
            }
            spec.order = *orders.front();
            spec.byzantine = czb::read_placement(placement, side);
            spec.seed = seed;
            spec.backtrack_budget = budget;
            if (trace) spec.trace_out = out.empty() ? std::string("scenario.trace.jsonl") : out;
            czb::debug_scenario(spec, std::cout);
            return 0;
        }

        czb::SweepSpec spec;
        spec.kind = czb::parse_topology(topology);
        spec.side = side;
        spec.orders = czb::parse_orders(order);
        spec.byzantine_counts = czb::parse_counts(byz);
        spec.trials = trials;
        spec.seed = seed;
        spec.out = out.empty() ? std::string("sweep.csv") : out;
        spec.trace = trace;
        spec.crosscheck_fraction = crosscheck;
        spec.pair_mode = czb::parse_pair_mode(pair_mode);
        spec.backtrack_budget = budget;
        spec.threads = threads;
        czb::run_sweep(spec, std::cout);
        return 0;
    } catch (const czb::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const czb::InvalidParameter& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const czb::ConfigurationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
