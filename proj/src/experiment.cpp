#include "tippool/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tippool/controller.hpp"
#include "tippool/tangle_sim.hpp"

namespace tippool {

using nlohmann::json;

namespace {

constexpr double kResidualCheckTol = 1e-6;

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

double require_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

std::uint64_t require_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool require_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
    return v.get<bool>();
}

std::string require_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> parse_fractions(const json& v) {
    if (!v.is_array()) throw ConfigError("fractions", "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(require_number(v[i], "fractions[" + std::to_string(i) + "]"));
    }
    return out;
}

ModelParams parse_classes(const json& v, double rate) {
    if (!v.is_array() || v.empty()) throw ConfigError("classes", "expected a non-empty array of objects");
    ModelParams params{rate, {}};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string base = "classes[" + std::to_string(i) + "]";
        if (!v[i].is_object()) throw ConfigError(base, "expected an object");
        DelayClass c;
        for (const auto& [key, value] : v[i].items()) {
            const std::string path = base + "." + key;
            if (key == "delay") {
                c.delay = require_number(value, path);
            } else if (key == "parents") {
                c.parent_count = static_cast<unsigned>(require_count(value, path));
            } else if (key == "fraction") {
                c.fraction = require_number(value, path);
            } else {
                throw ConfigError(path, "unknown key");
            }
        }
        params.classes.push_back(c);
    }
    return params;
}

// Model with empty classes removed, for residual checks at p = 0 or 1.
ModelParams active_model(const TwoClassParams& tp) {
    ModelParams m = tp.to_model();
    std::erase_if(m.classes, [](const DelayClass& c) { return c.fraction <= 0.0; });
    return m;
}

struct Axis {
    double lo;
    double hi;
    double px_lo;
    double px_hi;
    double operator()(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

std::vector<double> fine_grid() {
    std::vector<double> ps;
    for (int i = 0; i <= 100; ++i) ps.push_back(i / 100.0);
    return ps;
}

}  // namespace

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Analytic: return "analytic";
        case Mode::Simulate: return "simulate";
        case Mode::Sweep: return "sweep";
        case Mode::Compare: return "compare";
        case Mode::QuarantineDemo: return "quarantine-demo";
    }
    return "?";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::Analytic, Mode::Simulate, Mode::Sweep, Mode::Compare, Mode::QuarantineDemo}) {
        if (name == to_string(m)) return m;
    }
    throw ConfigError("mode", "unknown mode '" + std::string(name) +
                                  "' (expected analytic, simulate, sweep, compare or quarantine-demo)");
}

std::vector<double> default_fractions() {
    std::vector<double> ps;
    for (int i = 0; i <= 10; ++i) ps.push_back(i / 10.0);
    return ps;
}

void ExperimentConfig::validate() const {
    const auto check = [](bool ok, const char* key, const std::string& msg) {
        if (!ok) throw ConfigError(key, msg);
    };
    check(params.rate > 0.0 && std::isfinite(params.rate), "rate", "must be positive, got " + fmt(params.rate));
    check(params.base_delay > 0.0 && std::isfinite(params.base_delay), "base_delay",
          "must be positive, got " + fmt(params.base_delay));
    check(params.quarantine >= 0.0 && std::isfinite(params.quarantine), "quarantine",
          "must be >= 0, got " + fmt(params.quarantine));
    check(params.parent_count >= 2, "parents", "must be >= 2, got " + std::to_string(params.parent_count));
    check(params.value_fraction >= 0.0 && params.value_fraction <= 1.0, "p",
          "must lie in [0, 1], got " + fmt(params.value_fraction));
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) {
            throw ConfigError("fractions[" + std::to_string(i) + "]",
                              "value " + fmt(fractions[i]) + " outside [0, 1]");
        }
    }
    check(arrivals >= 1, "arrivals", "must be >= 1");
    check(warmup >= 0.0 && warmup < 1.0, "warmup", "must lie in [0, 1), got " + fmt(warmup));
    check(k_max >= 2, "k_max", "must be >= 2, got " + std::to_string(k_max));
    check(!window || (*window > 0.0 && std::isfinite(*window)), "window", "must be positive");
    check(tolerance > 0.0, "tolerance", "must be positive");
    check(threads >= 1, "threads", "must be >= 1");
    check(conflict_at >= 0.0 && std::isfinite(conflict_at), "conflict_at", "must be >= 0");
    if (classes) {
        try {
            classes->validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("classes", e.what());
        }
        check(mode == Mode::Analytic || mode == Mode::Simulate, "classes",
              "explicit classes are only supported by the analytic and simulate modes");
        check(!adaptive, "adaptive", "adaptive control requires the two-class parameters");
    }
}

ExperimentConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");

    ExperimentConfig cfg;
    const json* classes = nullptr;
    for (const auto& [key, value] : doc.items()) {
        if (key == "mode") {
            cfg.mode = parse_mode(require_string(value, key));
        } else if (key == "rate") {
            cfg.params.rate = require_number(value, key);
        } else if (key == "base_delay") {
            cfg.params.base_delay = require_number(value, key);
        } else if (key == "quarantine") {
            cfg.params.quarantine = require_number(value, key);
        } else if (key == "parents") {
            cfg.params.parent_count = static_cast<unsigned>(require_count(value, key));
        } else if (key == "p") {
            cfg.params.value_fraction = require_number(value, key);
        } else if (key == "fractions") {
            cfg.fractions = parse_fractions(value);
        } else if (key == "classes") {
            classes = &value;
        } else if (key == "arrivals") {
            cfg.arrivals = require_count(value, key);
        } else if (key == "seed") {
            cfg.seed = require_count(value, key);
        } else if (key == "warmup") {
            cfg.warmup = require_number(value, key);
        } else if (key == "adaptive") {
            cfg.adaptive = require_bool(value, key);
        } else if (key == "k_max") {
            cfg.k_max = static_cast<unsigned>(require_count(value, key));
        } else if (key == "window") {
            if (!value.is_null()) cfg.window = require_number(value, key);
        } else if (key == "tolerance") {
            cfg.tolerance = require_number(value, key);
        } else if (key == "threads") {
            cfg.threads = static_cast<unsigned>(require_count(value, key));
        } else if (key == "conflict_at") {
            cfg.conflict_at = require_number(value, key);
        } else if (key == "out_dir") {
            cfg.out_dir = require_string(value, key);
        } else if (key == "svg") {
            cfg.svg = require_bool(value, key);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (classes && !classes->is_null()) cfg.classes = parse_classes(*classes, cfg.params.rate);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j = json::object();
    j["mode"] = to_string(c.mode);
    j["rate"] = c.params.rate;
    j["base_delay"] = c.params.base_delay;
    j["quarantine"] = c.params.quarantine;
    j["parents"] = c.params.parent_count;
    j["p"] = c.params.value_fraction;
    j["fractions"] = c.fractions;
    if (c.classes) {
        json arr = json::array();
        for (const auto& cl : c.classes->classes) {
            arr.push_back({{"delay", cl.delay}, {"parents", cl.parent_count}, {"fraction", cl.fraction}});
        }
        j["classes"] = arr;
    } else {
        j["classes"] = nullptr;
    }
    j["arrivals"] = c.arrivals;
    j["seed"] = c.seed;
    j["warmup"] = c.warmup;
    j["adaptive"] = c.adaptive;
    j["k_max"] = c.k_max;
    j["window"] = c.window.value_or(10.0 * (c.params.base_delay + c.params.quarantine));
    j["tolerance"] = c.tolerance;
    j["threads"] = c.threads;
    j["conflict_at"] = c.conflict_at;
    j["out_dir"] = c.out_dir;
    j["svg"] = c.svg;
    return j.dump(2);
}

SweepReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    SweepReport report;

    if (config.mode == Mode::QuarantineDemo) {
        const std::vector<ScriptedTx> script{{1, 7, 0.0}, {2, 7, config.conflict_at}};
        const LikedOnlyResolver resolver;
        report.transcript = replay_script(script, config.params.quarantine, resolver).transcript;
        return report;
    }

    const ControllerConfig ctrl{config.params.base_delay, config.params.quarantine, config.k_max};
    const double window = config.window.value_or(ctrl.default_window());

    if (config.classes) {
        const ModelParams& m = *config.classes;
        SweepRow row;
        row.p = m.classes.back().fraction;
        row.l_analytic = solve_pool_size(m);
        for (const auto& c : m.classes) row.k_used = std::max(row.k_used, c.parent_count);
        const double d_last = m.classes.back().delay;
        ModelParams active{m.rate, {}};
        for (const auto& c : m.classes) {
            if (c.fraction > 0.0) active.classes.push_back(c);
        }
        if (!(std::abs(pool_size_residual(row.l_analytic, active)) <= kResidualCheckTol * m.rate * d_last)) {
            report.residual_checks_passed = false;
        }
        if (config.mode == Mode::Simulate) {
            SimConfig sc;
            sc.params = m;
            sc.total_arrivals = config.arrivals;
            sc.seed = config.seed;
            sc.warmup_fraction = config.warmup;
            sc.series_stride = 0;
            const SimResult r = run_simulation(sc);
            row.l_sim_mean = r.mean_pool_size;
            row.l_sim_stddev = r.pool_size_stddev;
            row.rel_error = std::abs(r.mean_pool_size - row.l_analytic) / row.l_analytic;
        }
        report.rows.push_back(row);
    } else {
        const std::vector<double> ps =
            config.mode == Mode::Simulate ? std::vector<double>{config.params.value_fraction} : config.fractions;

        for (double p : ps) {
            TwoClassParams tp = config.params;
            tp.value_fraction = p;
            if (config.adaptive) tp.parent_count = adaptive_k(p, ctrl);
            SweepRow row;
            row.p = p;
            row.k_used = tp.parent_count;
            row.l_analytic = solve_pool_size_two_class(tp);
            row.l_minus = l_minus(tp);
            row.l_plus = l_plus(tp);
            // Cross-check the two-class root against the general n-class residual.
            const double tol = kResidualCheckTol * tp.rate * (tp.base_delay + tp.quarantine);
            if (!(std::abs(pool_size_residual(row.l_analytic, active_model(tp))) <= tol)) {
                report.residual_checks_passed = false;
            }
            report.rows.push_back(row);
        }

        if (config.mode != Mode::Analytic) {
            SimConfig base;
            base.params = config.params.to_model();
            base.total_arrivals = config.arrivals;
            base.seed = config.seed;
            base.warmup_fraction = config.warmup;
            base.series_stride = 0;
            if (config.adaptive) base.parent_policy = make_adaptive_policy(ctrl, window);

            std::vector<SimResult> results;
            if (config.mode == Mode::Simulate) {
                results.push_back(run_simulation(with_value_fraction(base, config.params.value_fraction)));
            } else {
                for (auto& [p, r] : sweep(base, ps, config.threads)) results.push_back(std::move(r));
            }
            for (std::size_t i = 0; i < results.size(); ++i) {
                auto& row = report.rows[i];
                const auto& r = results[i];
                row.l_sim_mean = r.mean_pool_size;
                row.l_sim_stddev = r.pool_size_stddev;
                if (config.adaptive) row.k_used = r.dominant_parent_count();
                row.rel_error = std::abs(r.mean_pool_size - row.l_analytic) / row.l_analytic;
            }
        }
    }

    for (const auto& row : report.rows) {
        if (!row.rel_error) continue;
        report.max_rel_error = std::max(report.max_rel_error, *row.rel_error);
        if (!(*row.rel_error <= config.tolerance)) report.within_tolerance = false;
    }
    return report;
}

std::string format_csv(const SweepReport& report) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : report.rows) {
        out += fmt(r.p) + ',' + fmt(r.l_analytic) + ',' + fmt(r.l_minus) + ',' + fmt(r.l_plus) + ',' +
               fmt(r.l_sim_mean) + ',' + fmt(r.l_sim_stddev) + ',' + std::to_string(r.k_used) + ',' +
               fmt(r.rel_error) + '\n';
    }
    return out;
}

std::string summary_json(const ExperimentConfig& config, const SweepReport& report) {
    json j = json::object();
    j["config"] = json::parse(config_to_json(config));

    json rows = json::array();
    for (const auto& r : report.rows) {
        json row = {{"p", r.p}, {"L_analytic", r.l_analytic}, {"k_used", r.k_used}};
        const auto opt = [&row](const char* key, const std::optional<double>& v) {
            row[key] = v ? json(*v) : json(nullptr);
        };
        opt("L_minus", r.l_minus);
        opt("L_plus", r.l_plus);
        opt("L_sim_mean", r.l_sim_mean);
        opt("L_sim_stddev", r.l_sim_stddev);
        opt("rel_error", r.rel_error);
        rows.push_back(row);
    }
    j["rows"] = rows;

    json stats = json::object();
    stats["row_count"] = report.rows.size();
    stats["residual_checks_passed"] = report.residual_checks_passed;
    const bool simulated = std::any_of(report.rows.begin(), report.rows.end(),
                                       [](const SweepRow& r) { return r.rel_error.has_value(); });
    stats["max_rel_error"] = simulated ? json(report.max_rel_error) : json(nullptr);
    stats["within_tolerance"] = report.within_tolerance;
    stats["p_star"] = p_star(config.params.base_delay, config.params.quarantine, config.params.parent_count);
    j["summary"] = stats;

    if (!report.transcript.empty()) {
        json tr = json::array();
        for (const auto& line : report.transcript) {
            tr.push_back({{"time", line.time},
                          {"tx", line.tx_id},
                          {"event", line.event},
                          {"opinion", to_string(line.opinion)},
                          {"outcome", to_string(line.outcome)}});
        }
        j["transcript"] = tr;
    }
    return j.dump(2) + "\n";
}

std::string render_svg(const ExperimentConfig& config, const SweepReport& report) {
    constexpr double kWidth = 720.0, kHeight = 480.0;
    constexpr double kLeft = 70.0, kRight = 170.0, kTop = 30.0, kBottom = 55.0;

    const ControllerConfig ctrl{config.params.base_delay, config.params.quarantine, config.k_max};
    const auto grid = fine_grid();

    struct Curve {
        std::string label;
        std::string stroke;
        bool dashed;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Curve> curves;

    const auto solve_at = [&](double p, unsigned k) {
        TwoClassParams tp = config.params;
        tp.value_fraction = p;
        tp.parent_count = k;
        return solve_pool_size_two_class(tp);
    };

    if (config.adaptive) {
        static const char* kGreys[] = {"#888888", "#9a9a9a", "#aaaaaa", "#bbbbbb"};
        for (unsigned k = 2; k <= config.k_max; ++k) {
            Curve c{"fixed k=" + std::to_string(k), kGreys[(k - 2) % 4], true, {}};
            for (double p : grid) c.points.emplace_back(p, solve_at(p, k));
            curves.push_back(std::move(c));
        }
        Curve c{"adaptive (model)", "#1f77b4", false, {}};
        for (double p : grid) c.points.emplace_back(p, solve_at(p, adaptive_k(p, ctrl)));
        curves.push_back(std::move(c));
    } else {
        Curve c{"model k=" + std::to_string(config.params.parent_count), "#1f77b4", false, {}};
        for (double p : grid) c.points.emplace_back(p, solve_at(p, config.params.parent_count));
        curves.push_back(std::move(c));
    }

    double y_max = 1.0;
    for (const auto& c : curves) {
        for (const auto& pt : c.points) y_max = std::max(y_max, pt.second);
    }
    for (const auto& r : report.rows) {
        if (r.l_sim_mean) y_max = std::max(y_max, *r.l_sim_mean + r.l_sim_stddev.value_or(0.0));
    }
    const double y_step = nice_step(y_max);
    y_max = std::ceil(y_max * 1.02 / y_step) * y_step;

    const Axis x{0.0, 1.0, kLeft, kWidth - kRight};
    const Axis y{0.0, y_max, kHeight - kBottom, kTop};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes and ticks.
    os << "<line x1=\"" << fmt(x(0), "%.2f") << "\" y1=\"" << fmt(y(0), "%.2f") << "\" x2=\"" << fmt(x(1), "%.2f")
       << "\" y2=\"" << fmt(y(0), "%.2f") << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(x(0), "%.2f") << "\" y1=\"" << fmt(y(0), "%.2f") << "\" x2=\"" << fmt(x(0), "%.2f")
       << "\" y2=\"" << fmt(y(y_max), "%.2f") << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double p = i / 10.0;
        os << "<line x1=\"" << fmt(x(p), "%.2f") << "\" y1=\"" << fmt(y(0), "%.2f") << "\" x2=\"" << fmt(x(p), "%.2f")
           << "\" y2=\"" << fmt(y(0) + 5, "%.2f") << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(x(p), "%.2f") << "\" y=\"" << fmt(y(0) + 19, "%.2f")
           << "\" text-anchor=\"middle\">" << fmt(p, "%.1f") << "</text>\n";
    }
    for (double v = 0.0; v <= y_max + 1e-9; v += y_step) {
        os << "<line x1=\"" << fmt(x(0) - 5, "%.2f") << "\" y1=\"" << fmt(y(v), "%.2f") << "\" x2=\""
           << fmt(x(0), "%.2f") << "\" y2=\"" << fmt(y(v), "%.2f") << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(x(0) - 8, "%.2f") << "\" y=\"" << fmt(y(v) + 4, "%.2f")
           << "\" text-anchor=\"end\">" << fmt(v, "%g") << "</text>\n";
    }
    os << "<text x=\"" << fmt((x(0) + x(1)) / 2, "%.2f") << "\" y=\"" << fmt(kHeight - 12, "%.2f")
       << "\" text-anchor=\"middle\">proportion of value messages p</text>\n";
    os << "<text x=\"18\" y=\"" << fmt((y(0) + y(y_max)) / 2, "%.2f") << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fmt((y(0) + y(y_max)) / 2, "%.2f") << ")\">tip pool size L</text>\n";

    for (const auto& c : curves) {
        os << "<polyline fill=\"none\" stroke=\"" << c.stroke << "\" stroke-width=\"" << (c.dashed ? "1.2" : "2")
           << "\"" << (c.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            if (i) os << ' ';
            os << fmt(x(c.points[i].first), "%.2f") << ',' << fmt(y(c.points[i].second), "%.2f");
        }
        os << "\"/>\n";
    }

    bool any_sim = false;
    for (const auto& r : report.rows) {
        if (!r.l_sim_mean) continue;
        any_sim = true;
        const double cx = x(r.p);
        const double sd = r.l_sim_stddev.value_or(0.0);
        os << "<line x1=\"" << fmt(cx, "%.2f") << "\" y1=\"" << fmt(y(*r.l_sim_mean - sd), "%.2f") << "\" x2=\""
           << fmt(cx, "%.2f") << "\" y2=\"" << fmt(y(*r.l_sim_mean + sd), "%.2f") << "\" stroke=\"#d62728\"/>\n";
        os << "<circle cx=\"" << fmt(cx, "%.2f") << "\" cy=\"" << fmt(y(*r.l_sim_mean), "%.2f")
           << "\" r=\"3.5\" fill=\"#d62728\"/>\n";
    }

    // Legend.
    double ly = kTop + 10.0;
    const double lx = kWidth - kRight + 15.0;
    for (const auto& c : curves) {
        os << "<line x1=\"" << fmt(lx, "%.2f") << "\" y1=\"" << fmt(ly, "%.2f") << "\" x2=\"" << fmt(lx + 24, "%.2f")
           << "\" y2=\"" << fmt(ly, "%.2f") << "\" stroke=\"" << c.stroke << "\" stroke-width=\"2\""
           << (c.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        os << "<text x=\"" << fmt(lx + 30, "%.2f") << "\" y=\"" << fmt(ly + 4, "%.2f") << "\">" << c.label << "</text>\n";
        ly += 18.0;
    }
    if (any_sim) {
        os << "<circle cx=\"" << fmt(lx + 12, "%.2f") << "\" cy=\"" << fmt(ly, "%.2f") << "\" r=\"3.5\" fill=\"#d62728\"/>\n";
        os << "<text x=\"" << fmt(lx + 30, "%.2f") << "\" y=\"" << fmt(ly + 4, "%.2f") << "\">simulation &#177; sd</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::string> write_outputs(const ExperimentConfig& config, const SweepReport& report) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + config.out_dir + ": " + ec.message());

    std::vector<std::string> written;
    const auto write = [&](const std::string& name, const std::string& body) {
        const std::string path = (fs::path(config.out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << body;
        if (!out) throw std::runtime_error("failed writing " + path);
        written.push_back(path);
    };

    if (config.mode == Mode::QuarantineDemo) {
        write("transcript.txt", format_transcript(report.transcript));
    } else {
        write("report.csv", format_csv(report));
        if (config.svg && !config.classes) write("chart.svg", render_svg(config, report));
    }
    write("summary.json", summary_json(config, report));
    return written;
}

int exit_code(const ExperimentConfig& config, const SweepReport& report) {
    if (!report.residual_checks_passed) return 3;
    if (config.mode == Mode::Compare && !report.within_tolerance) return 2;
    return 0;
}

}  // namespace tippool
