#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tippool/delay_model.hpp"

namespace tippool {

using MessageId = std::uint32_t;

/// Id of the genesis message, visible at time 0.
inline constexpr MessageId kGenesis = 0;

struct Message {
    MessageId id = 0;
    std::uint32_t class_index = 0;
    double issue_time = 0.0;
    double reveal_time = 0.0;  ///< +inf if the message never entered the pool
    std::vector<MessageId> parent_ids;
};

/// Chooses the parent count for one issued message. Called once per
/// arrival, in arrival order, with the issue time and class index.
using ParentCountFn = std::function<unsigned(double issue_time, std::size_t class_index)>;

/// Builds a fresh ParentCountFn per simulation run so that stateful
/// policies never share state between runs.
using ParentPolicyFactory = std::function<ParentCountFn()>;

/// Routes one class through a QuarantinePipeline instead of a fixed delay.
/// Messages of `value_class` reach the node after `base_delay`, wait out the
/// quarantine and enter the pool only if admitted.
struct QuarantineWiring {
    std::size_t value_class = 1;
    double base_delay = 0.1;
    double quarantine = 4.0;
    double conflict_fraction = 0.0;  ///< chance a value message double-spends the previous one
};

struct SimConfig {
    ModelParams params;
    std::uint64_t total_arrivals = 1'000'000;
    std::uint64_t seed = 42;
    double warmup_fraction = 0.2;
    bool record_removal_times = false;
    std::size_t series_stride = 1;  ///< keep every n-th pool sample; 0 keeps none
    bool record_messages = false;
    ParentPolicyFactory parent_policy;  ///< empty: use each class's parent_count
    std::optional<QuarantineWiring> quarantine;

    void validate() const;
};

struct PoolSample {
    double time;
    std::uint32_t size;
};

struct SimResult {
    double mean_pool_size = 0.0;
    double pool_size_stddev = 0.0;
    std::uint64_t pool_samples = 0;
    std::vector<PoolSample> pool_size_series;
    std::vector<double> removal_times;
    std::vector<std::uint64_t> arrivals_by_class;

    double warmup_end = 0.0;     ///< start of the measurement window
    double last_arrival = 0.0;   ///< end of the measurement window
    std::size_t final_pool_size = 0;
    std::uint64_t revealed = 0;  ///< including genesis
    std::uint64_t removed = 0;
    std::uint64_t rejected = 0;  ///< value messages refused by the quarantine
    std::map<unsigned, std::uint64_t> parent_count_histogram;  ///< post-warmup issues

    std::vector<Message> messages;  ///< only with record_messages; index == id

    /// Most frequent post-warmup parent count (smallest on ties).
    unsigned dominant_parent_count() const;
};

/// Discrete-event simulation of DAG growth. Parents are drawn uniformly
/// without replacement from the pool at issue time; a message enters the
/// pool at its reveal time and removes whichever of its parents are still
/// there. Identical configs produce bit-identical results.
SimResult run_simulation(const SimConfig& config);

/// Fraction of recorded removal times <= x.
double empirical_removal_cdf(const SimResult& result, double x);

/// One simulation per value fraction over a two-class base config.
/// Point i uses seed derive_seed(base.seed, i). Runs up to `threads`
/// points concurrently; results are in input order.
std::vector<std::pair<double, SimResult>> sweep(const SimConfig& base, const std::vector<double>& fractions,
                                                unsigned threads = 1);

/// Copy of a two-class config with fractions (1 - p, p).
SimConfig with_value_fraction(const SimConfig& base, double p);

}  // namespace tippool
