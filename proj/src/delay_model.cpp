#include "tippool/delay_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace tippool {

namespace {

constexpr int kMaxBracketExpansions = 60;
constexpr int kMaxBisections = 400;
constexpr double kSolveRelTol = 1e-9;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

// Per-class reference rates seen by a single tip: p_i * rate * k_i / L.
std::vector<double> reference_rates(const ModelParams& params, double pool_size) {
    std::vector<double> mu;
    mu.reserve(params.classes.size());
    for (const auto& c : params.classes) {
        mu.push_back(c.fraction * params.rate * static_cast<double>(c.parent_count) / pool_size);
    }
    return mu;
}

ModelParams drop_empty_classes(const ModelParams& params) {
    ModelParams out{params.rate, {}};
    for (const auto& c : params.classes) {
        if (c.fraction > 0.0) out.classes.push_back(c);
    }
    return out;
}

struct Bracket {
    double lo;
    double hi;
};

// Bisection on a function that is positive at lo and negative at hi. Runs to
// floating-point resolution and returns the midpoint with the smallest
// residual seen.
double bisect(const std::function<double(double)>& f, Bracket b, double tol) {
    double flo = f(b.lo);
    if (flo == 0.0) return b.lo;
    double best = b.lo;
    double best_res = std::abs(flo);
    for (int i = 0; i < kMaxBisections; ++i) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (mid <= b.lo || mid >= b.hi) break;
        const double fm = f(mid);
        if (std::abs(fm) < best_res) {
            best = mid;
            best_res = std::abs(fm);
        }
        if (fm == 0.0) break;
        if ((fm > 0.0) == (flo > 0.0)) {
            b.lo = mid;
            flo = fm;
        } else {
            b.hi = mid;
        }
    }
    if (!(best_res <= tol)) {
        std::ostringstream os;
        os << "bisection residual " << best_res << " exceeds tolerance " << tol;
        throw ConvergenceError(os.str(), b.lo, b.hi);
    }
    return best;
}

// Starting bracket [0.5 * single-class level at d_1, 4 * single-class level at d_n],
// widened until the residual changes sign.
Bracket find_bracket(const std::function<double(double)>& f, double rate, double d_first,
                     double d_last, unsigned k_min, unsigned k_max) {
    const auto level = [rate](double d, unsigned k) {
        return rate * d * static_cast<double>(k) / static_cast<double>(k - 1);
    };
    double hi = level(d_last, k_max) * 4.0;
    double lo = level(d_first, k_min) * 0.5;
    if (!(lo > 0.0)) lo = hi * 1e-12;

    for (int i = 0; f(lo) < 0.0; ++i) {
        if (i == kMaxBracketExpansions) {
            throw ConvergenceError("no sign change below the lower bracket", lo, hi);
        }
        lo *= 0.5;
    }
    for (int i = 0; f(hi) > 0.0; ++i) {
        if (i == kMaxBracketExpansions) {
            std::ostringstream os;
            os << "no sign change after " << kMaxBracketExpansions << " bracket expansions";
            throw ConvergenceError(os.str(), lo, hi);
        }
        lo = hi;
        hi *= 2.0;
    }
    return {lo, hi};
}

}  // namespace

void ModelParams::validate() const {
    require(rate > 0.0 && std::isfinite(rate), "rate must be positive and finite");
    require(!classes.empty(), "at least one delay class is required");
    double sum = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& c = classes[i];
        require(c.delay >= 0.0 && std::isfinite(c.delay), "class delay must be finite and >= 0");
        require(c.parent_count >= 2, "class parent_count must be >= 2");
        require(c.fraction >= 0.0 && c.fraction <= 1.0, "class fraction must lie in [0, 1]");
        if (i > 0) require(classes[i - 1].delay <= c.delay, "class delays must be non-decreasing");
        sum += c.fraction;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "class fractions must sum to 1");
}

void TwoClassParams::validate() const {
    require(rate > 0.0 && std::isfinite(rate), "rate must be positive and finite");
    require(base_delay > 0.0 && std::isfinite(base_delay), "base_delay must be positive");
    require(quarantine >= 0.0 && std::isfinite(quarantine), "quarantine must be >= 0");
    require(parent_count >= 2, "parent_count must be >= 2");
    require(value_fraction >= 0.0 && value_fraction <= 1.0, "value_fraction must lie in [0, 1]");
}

ModelParams TwoClassParams::to_model() const {
    validate();
    return ModelParams{rate,
                       {DelayClass{base_delay, parent_count, 1.0 - value_fraction},
                        DelayClass{base_delay + quarantine, parent_count, value_fraction}}};
}

double removal_time_cdf(double x, const ModelParams& params, double pool_size) {
    params.validate();
    if (!(pool_size > 0.0)) throw std::domain_error("pool_size must be positive");
    const auto mu = reference_rates(params, pool_size);
    // Survival is exp(-sum_i mu_i * (x - d_i)^+).
    double hazard = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = params.classes[i].delay;
        if (x > d) hazard += mu[i] * (x - d);
    }
    return -std::expm1(-hazard);
}

double expected_removal_time(const ModelParams& params, double pool_size) {
    params.validate();
    if (!(pool_size > 0.0)) throw std::domain_error("pool_size must be positive");
    const auto mu = reference_rates(params, pool_size);
    const auto& cls = params.classes;
    if (!(mu[0] > 0.0)) {
        throw std::domain_error("lowest-delay class has zero reference rate");
    }

    // a_i = sum_{j<=i} mu_j. The exponent -d_i a_{i-1} + b_{i-1} is evaluated
    // as -sum_{j<i} mu_j (d_i - d_j), which is never positive.
    double value = cls[0].delay + 1.0 / mu[0];
    double a_prev = mu[0];
    for (std::size_t i = 1; i < cls.size(); ++i) {
        double exponent = 0.0;
        for (std::size_t j = 0; j < i; ++j) exponent -= mu[j] * (cls[i].delay - cls[j].delay);
        const double a_i = a_prev + mu[i];
        value -= std::exp(exponent) * (1.0 / a_prev - 1.0 / a_i);
        a_prev = a_i;
    }
    return value;
}

double pool_size_residual(double pool_size, const ModelParams& params) {
    return params.rate * expected_removal_time(params, pool_size) - pool_size;
}

double solve_pool_size(const ModelParams& params) {
    params.validate();
    const ModelParams active = drop_empty_classes(params);
    if (active.classes.empty()) throw std::domain_error("no class has a positive fraction");

    const double d_first = active.classes.front().delay;
    const double d_last = active.classes.back().delay;
    if (!(d_last > 0.0)) throw std::domain_error("all delays are zero; the pool size degenerates to 0");

    unsigned k_min = active.classes.front().parent_count;
    unsigned k_max = k_min;
    for (const auto& c : active.classes) {
        k_min = std::min(k_min, c.parent_count);
        k_max = std::max(k_max, c.parent_count);
    }

    const auto f = [&active](double L) { return pool_size_residual(L, active); };
    const Bracket b = find_bracket(f, active.rate, d_first, d_last, k_min, k_max);
    return bisect(f, b, kSolveRelTol * active.rate * d_last);
}

double two_class_residual(double pool_size, const TwoClassParams& params) {
    params.validate();
    if (!(pool_size > 0.0)) throw std::domain_error("pool_size must be positive");
    const double p = params.value_fraction;
    if (p >= 1.0) throw std::domain_error("two-class residual is undefined at value_fraction = 1");
    const double k = params.parent_count;
    const double lam = params.rate;
    const double decay = std::exp(-(1.0 - p) * lam * k * params.quarantine / pool_size);
    return params.base_delay * lam + pool_size / (k * (1.0 - p)) * (1.0 - p * decay) - pool_size;
}

double solve_pool_size_two_class(const TwoClassParams& params) {
    params.validate();
    if (params.value_fraction >= 1.0) {
        return solve_pool_size(ModelParams{
            params.rate, {DelayClass{params.base_delay + params.quarantine, params.parent_count, 1.0}}});
    }
    const auto f = [&params](double L) { return two_class_residual(L, params); };
    const double d_last = params.base_delay + params.quarantine;
    const Bracket b = find_bracket(f, params.rate, params.base_delay, d_last, params.parent_count,
                                   params.parent_count);
    return bisect(f, b, kSolveRelTol * params.rate * d_last);
}

double l_minus_constant(const TwoClassParams& params) {
    params.validate();
    const double k = params.parent_count;
    return k * params.rate * params.base_delay / (k - 1.0);
}

double l_minus(const TwoClassParams& params) {
    const double k = params.parent_count;
    const double h = params.base_delay;
    const double slope = params.rate * h * k / ((k - 1.0) * (k - 1.0)) *
                         -std::expm1(-params.quarantine * (k - 1.0) / h);
    return l_minus_constant(params) + params.value_fraction * slope;
}

double l_plus(const TwoClassParams& params) {
    params.validate();
    const double k = params.parent_count;
    const double lam = params.rate;
    const double h = params.base_delay;
    const double dq = params.quarantine;
    const double p = params.value_fraction;
    return k * lam / (k - 1.0) * (h + p * dq) - k * lam * dq * dq * (1.0 - p) / (2.0 * (dq + h));
}

double p_star(double base_delay, double quarantine, unsigned parent_count) {
    require(base_delay > 0.0, "base_delay must be positive");
    require(quarantine >= 0.0, "quarantine must be >= 0");
    require(parent_count >= 2, "parent_count must be >= 2");
    const double k = parent_count;
    return quarantine * (k - 1.0) / (2.0 * base_delay + (k + 1.0) * quarantine);
}

}  // namespace tippool
