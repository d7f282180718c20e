#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tippool {

/// One class of messages sharing a constant issue-to-visibility delay.
struct DelayClass {
    double delay = 0.0;         ///< seconds from issuance until the message enters the tip pool
    unsigned parent_count = 2;  ///< number of tips each message of this class references
    double fraction = 1.0;      ///< share of all arrivals belonging to this class
};

/// Total arrival rate plus the delay classes, ordered by non-decreasing delay.
struct ModelParams {
    double rate = 200.0;  ///< messages per second
    std::vector<DelayClass> classes;

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

/// The two-class layout: data messages with delay h and value messages
/// that additionally wait out the quarantine time.
struct TwoClassParams {
    double rate = 200.0;
    double base_delay = 0.1;
    double quarantine = 4.0;
    unsigned parent_count = 2;
    double value_fraction = 0.0;

    void validate() const;

    /// Classes [(h, k, 1-p), (h + d_Q, k, p)].
    ModelParams to_model() const;
};

/// Raised when the root bracket cannot be established or the residual of
/// the returned root exceeds tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double lo, double hi)
        : std::runtime_error(what), lo_(lo), hi_(hi) {}

    double bracket_lo() const noexcept { return lo_; }
    double bracket_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// CDF of the time from a tip's reveal until its first revealed child,
/// assuming a steady pool of `pool_size` tips. Throws std::domain_error for
/// pool_size <= 0.
double removal_time_cdf(double x, const ModelParams& params, double pool_size);

/// Closed-form mean of the removal time. Throws std::domain_error if the
/// lowest-delay class has zero reference rate.
double expected_removal_time(const ModelParams& params, double pool_size);

/// rate * E(T) - L. The stationary pool size is a root.
double pool_size_residual(double pool_size, const ModelParams& params);

/// Stationary pool size for n classes by bracketed bisection on
/// pool_size_residual. Classes with zero fraction are dropped first.
double solve_pool_size(const ModelParams& params);

/// Residual of the two-class implicit equation, written directly in terms
/// of (h, d_Q, k, p). Not defined for p = 1.
double two_class_residual(double pool_size, const TwoClassParams& params);

/// Root of the two-class implicit equation. p = 1 falls back to the single
/// class (h + d_Q, k, 1).
double solve_pool_size_two_class(const TwoClassParams& params);

/// Constant small-p approximation k*rate*h/(k-1).
double l_minus_constant(const TwoClassParams& params);

/// First-order expansion of the pool size around p = 0.
double l_minus(const TwoClassParams& params);

/// Large-p approximation, linear in p.
double l_plus(const TwoClassParams& params);

/// Critical value-message fraction where l_plus meets l_minus_constant.
double p_star(double base_delay, double quarantine, unsigned parent_count);

}  // namespace tippool
