#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tippool/controller.hpp"
#include "tippool/delay_model.hpp"
#include "tippool/experiment.hpp"
#include "tippool/quarantine.hpp"
#include "tippool/tangle_sim.hpp"

namespace py = pybind11;
using namespace tippool;

namespace {

// Python resolver: a callable taking the conflict set (list of entries) and
// returning a tx id or None.
class CallableResolver final : public ConflictResolver {
public:
    explicit CallableResolver(py::function fn) : fn_(std::move(fn)) {}
    std::optional<TxId> resolve(std::span<const QuarantineEntry> set) const override {
        const py::object r = fn_(std::vector<QuarantineEntry>(set.begin(), set.end()));
        if (r.is_none()) return std::nullopt;
        return r.cast<TxId>();
    }

private:
    py::function fn_;
};

std::optional<TxId> include_with(QuarantinePipeline& q, TxId tx, double t, const py::object& resolver) {
    if (resolver.is_none()) return q.on_inclusion_due(tx, t, LikedOnlyResolver{});
    return q.on_inclusion_due(tx, t, CallableResolver(resolver.cast<py::function>()));
}

}  // namespace

PYBIND11_MODULE(_tippool, m) {
    m.doc() = "Tip pool size model, simulator, quarantine pipeline and parent-count controller";

    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<DelayClass>(m, "DelayClass")
        .def(py::init<double, unsigned, double>(), py::arg("delay"), py::arg("parent_count") = 2,
             py::arg("fraction") = 1.0)
        .def_readwrite("delay", &DelayClass::delay)
        .def_readwrite("parent_count", &DelayClass::parent_count)
        .def_readwrite("fraction", &DelayClass::fraction)
        .def("__repr__", [](const DelayClass& c) {
            return "DelayClass(delay=" + std::to_string(c.delay) + ", parent_count=" +
                   std::to_string(c.parent_count) + ", fraction=" + std::to_string(c.fraction) + ")";
        });

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<double, std::vector<DelayClass>>(), py::arg("rate"), py::arg("classes"))
        .def_readwrite("rate", &ModelParams::rate)
        .def_readwrite("classes", &ModelParams::classes)
        .def("validate", &ModelParams::validate);

    py::class_<TwoClassParams>(m, "TwoClassParams")
        .def(py::init<double, double, double, unsigned, double>(), py::arg("rate") = 200.0,
             py::arg("base_delay") = 0.1, py::arg("quarantine") = 4.0, py::arg("parent_count") = 2,
             py::arg("value_fraction") = 0.0)
        .def_readwrite("rate", &TwoClassParams::rate)
        .def_readwrite("base_delay", &TwoClassParams::base_delay)
        .def_readwrite("quarantine", &TwoClassParams::quarantine)
        .def_readwrite("parent_count", &TwoClassParams::parent_count)
        .def_readwrite("value_fraction", &TwoClassParams::value_fraction)
        .def("validate", &TwoClassParams::validate)
        .def("to_model", &TwoClassParams::to_model);

    m.def("removal_time_cdf", &removal_time_cdf, py::arg("x"), py::arg("params"), py::arg("pool_size"));
    m.def("expected_removal_time", &expected_removal_time, py::arg("params"), py::arg("pool_size"));
    m.def("pool_size_residual", &pool_size_residual, py::arg("pool_size"), py::arg("params"));
    m.def("solve_pool_size", &solve_pool_size, py::arg("params"));
    m.def("solve_pool_size_two_class", &solve_pool_size_two_class, py::arg("params"));
    m.def("l_minus", &l_minus, py::arg("params"));
    m.def("l_minus_constant", &l_minus_constant, py::arg("params"));
    m.def("l_plus", &l_plus, py::arg("params"));
    m.def("p_star", &p_star, py::arg("base_delay"), py::arg("quarantine"), py::arg("parent_count"));

    py::class_<QuarantineWiring>(m, "QuarantineWiring")
        .def(py::init<std::size_t, double, double, double>(), py::arg("value_class") = 1,
             py::arg("base_delay") = 0.1, py::arg("quarantine") = 4.0, py::arg("conflict_fraction") = 0.0)
        .def_readwrite("value_class", &QuarantineWiring::value_class)
        .def_readwrite("base_delay", &QuarantineWiring::base_delay)
        .def_readwrite("quarantine", &QuarantineWiring::quarantine)
        .def_readwrite("conflict_fraction", &QuarantineWiring::conflict_fraction);

    py::class_<ControllerConfig>(m, "ControllerConfig")
        .def(py::init<double, double, unsigned>(), py::arg("base_delay") = 0.1, py::arg("quarantine") = 4.0,
             py::arg("k_max") = 8)
        .def_readwrite("base_delay", &ControllerConfig::base_delay)
        .def_readwrite("quarantine", &ControllerConfig::quarantine)
        .def_readwrite("k_max", &ControllerConfig::k_max)
        .def("default_window", &ControllerConfig::default_window);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("params", &SimConfig::params)
        .def_readwrite("total_arrivals", &SimConfig::total_arrivals)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("warmup_fraction", &SimConfig::warmup_fraction)
        .def_readwrite("record_removal_times", &SimConfig::record_removal_times)
        .def_readwrite("series_stride", &SimConfig::series_stride)
        .def_readwrite("quarantine", &SimConfig::quarantine)
        .def(
            "use_adaptive_parents",
            [](SimConfig& c, const ControllerConfig& cfg, std::optional<double> window) {
                c.parent_policy = make_adaptive_policy(cfg, window.value_or(cfg.default_window()));
            },
            py::arg("controller"), py::arg("window") = py::none())
        .def("validate", &SimConfig::validate);

    py::class_<PoolSample>(m, "PoolSample")
        .def_readonly("time", &PoolSample::time)
        .def_readonly("size", &PoolSample::size);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("mean_pool_size", &SimResult::mean_pool_size)
        .def_readonly("pool_size_stddev", &SimResult::pool_size_stddev)
        .def_readonly("pool_samples", &SimResult::pool_samples)
        .def_readonly("pool_size_series", &SimResult::pool_size_series)
        .def_readonly("removal_times", &SimResult::removal_times)
        .def_readonly("arrivals_by_class", &SimResult::arrivals_by_class)
        .def_readonly("warmup_end", &SimResult::warmup_end)
        .def_readonly("last_arrival", &SimResult::last_arrival)
        .def_readonly("final_pool_size", &SimResult::final_pool_size)
        .def_readonly("revealed", &SimResult::revealed)
        .def_readonly("removed", &SimResult::removed)
        .def_readonly("rejected", &SimResult::rejected)
        .def_readonly("parent_count_histogram", &SimResult::parent_count_histogram)
        .def("dominant_parent_count", &SimResult::dominant_parent_count);

    m.def("run_simulation", &run_simulation, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("empirical_removal_cdf", &empirical_removal_cdf, py::arg("result"), py::arg("x"));
    m.def("sweep", &sweep, py::arg("base"), py::arg("fractions"), py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("with_value_fraction", &with_value_fraction, py::arg("base"), py::arg("p"));

    py::class_<FractionEstimator>(m, "FractionEstimator")
        .def(py::init<double, std::size_t>(), py::arg("window"), py::arg("value_class") = 1)
        .def("observe", &FractionEstimator::observe, py::arg("class_index"), py::arg("t"))
        .def("estimate", &FractionEstimator::estimate)
        .def("sample_count", &FractionEstimator::sample_count)
        .def_property_readonly("window", &FractionEstimator::window);
    m.def("adaptive_k", &adaptive_k, py::arg("p_bar"), py::arg("config"));

    py::enum_<Opinion>(m, "Opinion")
        .value("Unknown", Opinion::Unknown)
        .value("Liked", Opinion::Liked)
        .value("Disliked", Opinion::Disliked);
    py::enum_<Outcome>(m, "Outcome")
        .value("Pending", Outcome::Pending)
        .value("AdmittedDirect", Outcome::AdmittedDirect)
        .value("AdmittedByResolver", Outcome::AdmittedByResolver)
        .value("Rejected", Outcome::Rejected);

    py::class_<QuarantineEntry>(m, "QuarantineEntry")
        .def_readonly("tx_id", &QuarantineEntry::tx_id)
        .def_readonly("conflict_key", &QuarantineEntry::conflict_key)
        .def_readonly("arrival_time", &QuarantineEntry::arrival_time)
        .def_readonly("opinion_due", &QuarantineEntry::opinion_due)
        .def_readonly("inclusion_due", &QuarantineEntry::inclusion_due)
        .def_readonly("opinion", &QuarantineEntry::opinion)
        .def_readonly("outcome", &QuarantineEntry::outcome)
        .def_readonly("admission_time", &QuarantineEntry::admission_time);

    py::class_<QuarantinePipeline>(m, "QuarantinePipeline")
        .def(py::init<double>(), py::arg("quarantine"))
        .def("on_arrival", &QuarantinePipeline::on_arrival, py::arg("tx_id"), py::arg("conflict_key"), py::arg("t"),
             py::return_value_policy::copy)
        .def("on_opinion_due", &QuarantinePipeline::on_opinion_due, py::arg("tx_id"), py::arg("t"))
        .def("on_inclusion_due", &include_with, py::arg("tx_id"), py::arg("t"), py::arg("resolver") = py::none(),
             "Resolver is a callable on the conflict set returning a tx id or None; default admits the "
             "unique Liked member.")
        .def("effective_delay", &QuarantinePipeline::effective_delay)
        .def("entry", &QuarantinePipeline::entry, py::arg("tx_id"), py::return_value_policy::copy)
        .def("snapshot", &QuarantinePipeline::snapshot)
        .def("__len__", &QuarantinePipeline::size)
        .def("__contains__", &QuarantinePipeline::contains);

    py::class_<TranscriptLine>(m, "TranscriptLine")
        .def_readonly("time", &TranscriptLine::time)
        .def_readonly("tx_id", &TranscriptLine::tx_id)
        .def_readonly("event", &TranscriptLine::event)
        .def_readonly("opinion", &TranscriptLine::opinion)
        .def_readonly("outcome", &TranscriptLine::outcome);

    m.def(
        "replay",
        [](const std::vector<std::tuple<TxId, ConflictKey, double>>& script, double quarantine) {
            std::vector<ScriptedTx> txs;
            for (const auto& [id, key, t] : script) txs.push_back({id, key, t});
            const auto r = replay_script(txs, quarantine, LikedOnlyResolver{});
            return py::make_tuple(r.transcript, r.entries, format_transcript(r.transcript));
        },
        py::arg("script"), py::arg("quarantine"),
        "Replays (tx_id, conflict_key, arrival_time) tuples. Returns (transcript, entries, text).");

    m.def(
        "run_config",
        [](const std::string& json_text) {
            std::string csv, summary;
            int code = 0;
            {
                py::gil_scoped_release release;
                const ExperimentConfig c = parse_config(json_text);
                const SweepReport r = run_experiment(c);
                csv = format_csv(r);
                summary = summary_json(c, r);
                code = exit_code(c, r);
            }
            return py::make_tuple(csv, summary, code);
        },
        py::arg("json_text"), "Runs an experiment config. Returns (csv, summary_json, exit_code).");
}
