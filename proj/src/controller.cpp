#include "tippool/controller.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "tippool/delay_model.hpp"

namespace tippool {

void ControllerConfig::validate() const {
    if (!(base_delay > 0.0)) throw std::invalid_argument("base_delay must be positive");
    if (!(quarantine >= 0.0)) throw std::invalid_argument("quarantine must be >= 0");
    if (k_max < 2) throw std::invalid_argument("k_max must be >= 2");
}

FractionEstimator::FractionEstimator(double window, std::size_t value_class)
    : window_(window), value_class_(value_class) {
    if (!(window > 0.0) || !std::isfinite(window)) throw std::invalid_argument("window must be positive");
}

void FractionEstimator::observe(std::size_t class_index, double t) {
    if (seen_ && t < last_t_) throw std::domain_error("observation times must not decrease");
    seen_ = true;
    last_t_ = t;

    const bool is_value = class_index == value_class_;
    samples_.emplace_back(t, is_value);
    if (is_value) ++value_count_;

    const double cutoff = t - window_;
    while (!samples_.empty() && samples_.front().first < cutoff) {
        if (samples_.front().second) --value_count_;
        samples_.pop_front();
    }
}

double FractionEstimator::estimate() const noexcept {
    if (samples_.empty()) return 0.0;
    return static_cast<double>(value_count_) / static_cast<double>(samples_.size());
}

unsigned adaptive_k(double p_bar, const ControllerConfig& config) {
    config.validate();
    if (!(p_bar >= 0.0 && p_bar <= 1.0)) throw std::invalid_argument("p_bar must lie in [0, 1]");
    unsigned k = 2;
    while (p_star(config.base_delay, config.quarantine, k) < p_bar && k < config.k_max) ++k;
    return k;
}

ParentPolicyFactory make_adaptive_policy(const ControllerConfig& config, double window, std::size_t value_class) {
    config.validate();
    return [config, window, value_class]() -> ParentCountFn {
        auto estimator = std::make_shared<FractionEstimator>(window, value_class);
        return [config, estimator](double t, std::size_t class_index) {
            estimator->observe(class_index, t);
            return adaptive_k(estimator->estimate(), config);
        };
    };
}

}  // namespace tippool
