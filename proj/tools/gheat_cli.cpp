#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gheat/runner.hpp"

namespace {

using nlohmann::json;

int env_threads() {
    const char* v = std::getenv("GHEAT_THREADS");
    if (!v) return 0;
    try {
        return std::max(0, std::stoi(v));
    } catch (...) {
        return 0;
    }
}

json demo_config(const std::string& name) {
    if (name == "polymer") {
        auto cfg = gheat::runner::default_config("solve-nonlinear");
        cfg["problem"] = "polymer";
        return cfg;
    }
    if (name == "neuron") {
        auto cfg = gheat::runner::default_config("solve-nonlinear");
        cfg["problem"] = "neuron";
        return cfg;
    }
    if (name == "heat-medium") {
        std::cout << "note: the Dirichlet heat-medium variant is not supported; "
                     "running the Neumann variant (additive noise) instead\n";
        auto cfg = gheat::runner::default_config("solve-nonlinear");
        cfg["problem"] = "medium";
        return cfg;
    }
    if (name == "anderson") return gheat::runner::default_config("anderson");
    throw CLI::ValidationError(
        "--demo must be one of polymer, heat-medium, neuron, anderson");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "gheat: numerical laboratory for stochastic heat equations driven by "
        "space-time white noise with volatility uncertainty"};

    std::string config_path, command, out_dir, demo;
    std::uint64_t seed = 0;
    bool seed_set = false, quick = false;
    int threads = 0;

    app.add_option("--config", config_path, "JSON experiment config file");
    app.add_option("--command", command,
                   "run a command with default config (alternative to --config)");
    app.add_option("--demo", demo,
                   "demo preset: polymer, heat-medium, neuron, anderson");
    app.add_option("--seed", seed, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "output directory override");
    app.add_option("--threads", threads, "worker thread count (0 = hardware)");
    app.add_flag("--quick", quick, "reduced Monte Carlo sizes for smoke runs");

    CLI11_PARSE(app, argc, argv);

    json cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) {
                std::cerr << "config error: cannot open " << config_path << "\n";
                return 2;
            }
            cfg = json::parse(f, nullptr, /*allow_exceptions=*/false);
            if (cfg.is_discarded()) {
                std::cerr << "config error: invalid JSON in " << config_path << "\n";
                return 2;
            }
        } else if (!demo.empty()) {
            cfg = demo_config(demo);
        } else if (!command.empty()) {
            cfg = gheat::runner::default_config(command);
        } else {
            std::cerr << "usage: provide --config FILE, --command NAME or "
                         "--demo NAME (see --help)\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    if (seed_set) cfg["master_seed"] = seed;
    if (!out_dir.empty()) cfg["output_dir"] = out_dir;
    if (quick) cfg["quick"] = true;
    if (threads > 0)
        cfg["threads"] = threads;
    else if (!cfg.contains("threads") || cfg["threads"].get<int>() == 0)
        cfg["threads"] = env_threads();

    const auto result = gheat::runner::run(cfg, std::cout);
    if (!result.config_error) {
        int failed = 0;
        for (const auto& ck : result.checks)
            if (!ck.pass) {
                ++failed;
                std::cout << "failed check: " << ck.module << "/" << ck.name
                          << "\n";
            }
        std::cout << result.checks.size() - failed << "/" << result.checks.size()
                  << " checks passed\n";
    }
    return gheat::runner::exit_code(result);
}
