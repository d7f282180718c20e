#pragma once

#include <cstddef>
#include <deque>
#include <utility>

#include "tippool/tangle_sim.hpp"

namespace tippool {

struct ControllerConfig {
    double base_delay = 0.1;
    double quarantine = 4.0;
    unsigned k_max = 8;

    void validate() const;

    /// Default moving-average window, 10 * (h + d_Q).
    double default_window() const { return 10.0 * (base_delay + quarantine); }
};

/// Moving-average estimate of the value-message share over a trailing
/// time window.
class FractionEstimator {
public:
    explicit FractionEstimator(double window, std::size_t value_class = 1);

    /// Records one observed message. Throws std::domain_error if t
    /// decreases. Samples older than t - window are evicted.
    void observe(std::size_t class_index, double t);

    /// Share of value messages in the window; 0 when the window is empty.
    double estimate() const noexcept;

    std::size_t sample_count() const noexcept { return samples_.size(); }
    double window() const noexcept { return window_; }

private:
    double window_;
    std::size_t value_class_;
    std::deque<std::pair<double, bool>> samples_;
    std::size_t value_count_ = 0;
    double last_t_ = 0.0;
    bool seen_ = false;
};

/// Starts at k = 2 and increments while p*(k) < p_bar and k < k_max.
unsigned adaptive_k(double p_bar, const ControllerConfig& config);

/// Per-run policy: each issued message is first observed by a fresh
/// FractionEstimator, then k = adaptive_k(current estimate).
ParentPolicyFactory make_adaptive_policy(const ControllerConfig& config, double window,
                                         std::size_t value_class = 1);

}  // namespace tippool
