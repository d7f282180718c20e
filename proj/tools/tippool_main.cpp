// tippool: analytic predictions, simulations and reports for tip pool size
// under delay classes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tippool/experiment.hpp"

using nlohmann::json;

namespace {

std::vector<double> split_fractions(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw tippool::ConfigError("fractions", "cannot parse '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tip pool size under delay classes: model, simulation and adaptive parent control"};

    std::string mode;
    std::string config_path;
    app.add_option("mode", mode, "analytic | simulate | sweep | compare | quarantine-demo");
    app.add_option("--config", config_path, "flat JSON config file; flags override its keys")->check(CLI::ExistingFile);

    double rate = 0, base_delay = 0, quarantine = 0, p = 0, warmup = 0, window = 0, tolerance = 0, conflict_at = 0;
    unsigned parents = 0, k_max = 0, threads = 0;
    std::uint64_t arrivals = 0, seed = 0;
    std::string fractions, out_dir;
    bool adaptive = false, svg = false;

    auto* o_rate = app.add_option("--rate", rate, "total arrival rate (messages/s)");
    auto* o_base = app.add_option("--base-delay", base_delay, "base delay h (s)");
    auto* o_quar = app.add_option("--quarantine", quarantine, "quarantine time d_Q (s)");
    auto* o_parents = app.add_option("--parents", parents, "parent count k");
    auto* o_p = app.add_option("--p", p, "value fraction for simulate mode");
    auto* o_frac = app.add_option("--fractions", fractions, "comma-separated value fractions");
    auto* o_arr = app.add_option("--arrivals", arrivals, "simulated arrivals per point");
    auto* o_seed = app.add_option("--seed", seed, "64-bit seed");
    auto* o_warm = app.add_option("--warmup", warmup, "discarded leading fraction of simulated time");
    auto* o_adapt = app.add_flag("--adaptive", adaptive, "adapt the parent count to the value fraction");
    auto* o_kmax = app.add_option("--k-max", k_max, "maximum parent count for adaptive control");
    auto* o_window = app.add_option("--window", window, "moving-average window (s)");
    auto* o_tol = app.add_option("--tolerance", tolerance, "compare mode: max relative error");
    auto* o_threads = app.add_option("--threads", threads, "concurrent sweep points");
    auto* o_conf = app.add_option("--conflict-at", conflict_at, "quarantine-demo: double-spend arrival time (s)");
    auto* o_out = app.add_option("--out-dir", out_dir, "output directory");
    auto* o_svg = app.add_flag("--svg", svg, "also write chart.svg");

    CLI11_PARSE(app, argc, argv);

    try {
        json doc = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            try {
                doc = json::parse(buf.str());
            } catch (const json::parse_error& e) {
                throw tippool::ConfigError("config", std::string("malformed JSON: ") + e.what());
            }
            if (!doc.is_object()) throw tippool::ConfigError("config", "expected a JSON object");
        }

        if (!mode.empty()) doc["mode"] = mode;
        if (*o_rate) doc["rate"] = rate;
        if (*o_base) doc["base_delay"] = base_delay;
        if (*o_quar) doc["quarantine"] = quarantine;
        if (*o_parents) doc["parents"] = parents;
        if (*o_p) doc["p"] = p;
        if (*o_frac) doc["fractions"] = split_fractions(fractions);
        if (*o_arr) doc["arrivals"] = arrivals;
        if (*o_seed) doc["seed"] = seed;
        if (*o_warm) doc["warmup"] = warmup;
        if (*o_adapt) doc["adaptive"] = adaptive;
        if (*o_kmax) doc["k_max"] = k_max;
        if (*o_window) doc["window"] = window;
        if (*o_tol) doc["tolerance"] = tolerance;
        if (*o_threads) doc["threads"] = threads;
        if (*o_conf) doc["conflict_at"] = conflict_at;
        if (*o_out) doc["out_dir"] = out_dir;
        if (*o_svg) doc["svg"] = svg;

        const tippool::ExperimentConfig config = tippool::parse_config(doc.dump());
        const tippool::SweepReport report = tippool::run_experiment(config);
        const auto written = tippool::write_outputs(config, report);

        if (config.mode == tippool::Mode::QuarantineDemo) {
            std::cout << tippool::format_transcript(report.transcript);
        } else {
            std::cout << tippool::format_csv(report);
        }
        for (const auto& path : written) std::cerr << "wrote " << path << '\n';

        const int code = tippool::exit_code(config, report);
        if (code == 2) {
            std::cerr << "compare: max rel_error " << report.max_rel_error << " exceeds tolerance "
                      << config.tolerance << '\n';
        } else if (code == 3) {
            std::cerr << "residual check failed\n";
        }
        return code;
    } catch (const tippool::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
