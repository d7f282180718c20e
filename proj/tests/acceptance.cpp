// Acceptance suite: one [PASS]/[FAIL] line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tippool/controller.hpp"
#include "tippool/delay_model.hpp"
#include "tippool/experiment.hpp"
#include "tippool/quarantine.hpp"
#include "tippool/rng.hpp"
#include "tippool/tangle_sim.hpp"

using namespace tippool;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kRate = 200.0;
constexpr double kBase = 0.1;
constexpr double kQuarantine = 4.0;
constexpr std::uint64_t kArrivals = 1'000'000;

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    std::printf("[%s] %s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

SimConfig canonical_sim(double p, unsigned k) {
    SimConfig c;
    c.params = TwoClassParams{kRate, kBase, kQuarantine, k, p}.to_model();
    c.total_arrivals = kArrivals;
    c.series_stride = 0;
    return c;
}

// Single-class closed form, analytic and simulated.
void ac1() {
    bool ok = true;
    double worst_solver = 0.0, worst_sim = 0.0, worst_time = 0.0;
    for (unsigned k : {2u, 3u, 4u, 8u}) {
        const ModelParams m{kRate, {{kBase, k, 1.0}}};
        const double closed = k * kRate * kBase / (k - 1.0);
        const auto t0 = Clock::now();
        const double solved = solve_pool_size(m);
        SimConfig c;
        c.params = m;
        c.total_arrivals = kArrivals;
        c.series_stride = 0;
        const double sim = run_simulation(c).mean_pool_size;
        const double elapsed = seconds_since(t0);
        worst_solver = std::max(worst_solver, rel(solved, closed));
        worst_sim = std::max(worst_sim, rel(sim, closed));
        worst_time = std::max(worst_time, elapsed);
        ok = ok && rel(solved, closed) <= 1e-9 && rel(sim, closed) <= 0.05 && elapsed <= 10.0;
    }
    report("AC1", ok,
           fmt("single class k in {2,3,4,8}: solver rel err max %.2e (<=1e-9), sim rel err max %.4f (<=0.05), "
               "slowest point %.2fs (<=10s)",
               worst_solver, worst_sim, worst_time));
}

// Two-class sweep, simulation vs model, k = 2 and 4.
void ac2() {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst = 0.0;
    double l_p0 = 0.0, l_p1 = 0.0;
    for (unsigned k : {2u, 4u}) {
        const auto results = sweep(canonical_sim(0.0, k), default_fractions());
        for (const auto& [p, r] : results) {
            const double model = solve_pool_size_two_class(TwoClassParams{kRate, kBase, kQuarantine, k, p});
            const double e = rel(r.mean_pool_size, model);
            worst = std::max(worst, e);
            if (e > 0.05) {
                ok = false;
                std::printf("       k=%u p=%.1f sim=%.3f model=%.3f rel=%.4f\n", k, p, r.mean_pool_size, model, e);
            }
            if (k == 2 && p == 0.0) l_p0 = r.mean_pool_size;
            if (k == 2 && p == 1.0) l_p1 = r.mean_pool_size;
        }
    }
    const double elapsed = seconds_since(t0);
    ok = ok && rel(l_p0, 40.0) <= 0.05 && rel(l_p1, 1640.0) <= 0.05 && elapsed <= 300.0;
    report("AC2", ok,
           fmt("22 points at 1e6 arrivals: max rel err %.4f (<=0.05), k=2 L(p=0)=%.2f (~40), L(p=1)=%.1f "
               "(1640 +-5%%), total %.1fs (<=300s)",
               worst, l_p0, l_p1, elapsed));
}

// p* against the numerical crossing of the two approximations.
void ac3() {
    const double ps = p_star(kBase, kQuarantine, 2);
    const auto gap = [](double p) {
        const TwoClassParams tp{kRate, kBase, kQuarantine, 2, p};
        return l_plus(tp) - l_minus_constant(tp);
    };
    double lo = 0.0, hi = 1.0;
    if (!(gap(lo) < 0.0 && gap(hi) > 0.0)) {
        report("AC3", false, "l_plus - l_minus_constant does not change sign on [0, 1]");
        return;
    }
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    const double crossing = 0.5 * (lo + hi);
    const bool ok = std::abs(ps - 4.0 / 12.2) <= 1e-12 && std::abs(ps - crossing) <= 1e-6;
    report("AC3", ok,
           fmt("p*=%.12f, 4/12.2=%.12f, numerical crossing=%.12f, |diff|=%.2e (<=1e-6)", ps, 4.0 / 12.2, crossing,
               std::abs(ps - crossing)));
}

// E(T) against Monte-Carlo and quadrature on random class sets.
void ac4() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mc_fail = 0, quad_fail = 0;
    double worst_z = 0.0, worst_quad = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + gen() % 5;
        std::vector<double> delays(n), weights(n);
        for (auto& d : delays) d = 5.0 * u(gen);
        std::sort(delays.begin(), delays.end());
        double wsum = 0.0;
        for (auto& w : weights) wsum += (w = 0.05 + u(gen));
        ModelParams m{50.0 + 450.0 * u(gen), {}};
        std::vector<oracle::Cls> cls;
        double psum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = i + 1 == n ? 1.0 - psum : weights[i] / wsum;
            psum += p;
            const unsigned k = 2 + static_cast<unsigned>(gen() % 7);
            m.classes.push_back({delays[i], k, p});
            cls.push_back({delays[i], static_cast<double>(k), p});
        }
        const double pool = 10.0 + 2000.0 * u(gen);
        const double et = expected_removal_time(m, pool);

        const auto mc = oracle::mc_removal_mean(cls, m.rate, pool, 1'000'000, 7000 + trial);
        const double z = std::abs(et - mc.mean) / mc.std_error;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) {
            ++mc_fail;
            std::printf("       trial %d: n=%zu E(T)=%.6f mc=%.6f +- %.6f (z=%.2f)\n", trial, n, et, mc.mean,
                        mc.std_error, z);
        }
        const double q = oracle::quadrature_removal_mean(cls, m.rate, pool);
        worst_quad = std::max(worst_quad, rel(et, q));
        if (rel(et, q) > 1e-6) ++quad_fail;
    }
    report("AC4", mc_fail == 0 && quad_fail == 0,
           fmt("100 random sets (n<=5): Monte-Carlo 1e6 samples max |z|=%.2f (<=3), %d outside; quadrature max rel "
               "err %.2e (<=1e-6), %d outside",
               worst_z, mc_fail, worst_quad, quad_fail));
}

// KS distance of simulated removal times against the model CDF at the simulated L.
void ac5() {
    auto c = canonical_sim(0.5, 2);
    c.record_removal_times = true;
    const auto r = run_simulation(c);
    auto xs = r.removal_times;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = removal_time_cdf(xs[i], c.params, r.mean_pool_size);
        ks = std::max({ks, std::abs((i + 1) / n - f), std::abs(f - i / n)});
    }
    report("AC5", ks <= 0.02,
           fmt("canonical p=0.5 k=2, %zu removal times, simulated L=%.2f: KS=%.4f (<=0.02)", xs.size(),
               r.mean_pool_size, ks));
}

// Adaptive parent count against fixed k = 2.
void ac6() {
    const ControllerConfig cfg{kBase, kQuarantine, 8};
    bool ok = adaptive_k(0.5, cfg) == 4 && adaptive_k(0.9, cfg) == 8;
    std::string detail = fmt("adaptive_k(0.5)=%u adaptive_k(0.9)=%u;", adaptive_k(0.5, cfg), adaptive_k(0.9, cfg));
    double worst_ratio = 0.0;
    std::vector<double> ps;
    for (int i = 0; i <= 15; ++i) ps.push_back(0.05 * i);
    for (double p : ps) {
        auto fixed = canonical_sim(p, 2);
        auto adaptive = fixed;
        adaptive.parent_policy = make_adaptive_policy(cfg, cfg.default_window());
        const auto ra = run_simulation(adaptive);
        const unsigned k = ra.dominant_parent_count();
        const double level = k * kRate * kBase / (k - 1.0);
        const double ratio = ra.mean_pool_size / level;
        worst_ratio = std::max(worst_ratio, ratio);
        bool point_ok = ratio < 2.0;
        double lf = 0.0;
        if (p <= 0.7 + 1e-12) {
            lf = run_simulation(fixed).mean_pool_size;
            point_ok = point_ok && ra.mean_pool_size <= lf;
        }
        if (!point_ok) {
            std::printf("       p=%.2f k=%u adaptive=%.2f fixed=%.2f ratio=%.3f\n", p, k, ra.mean_pool_size, lf, ratio);
        }
        ok = ok && point_ok;
    }
    report("AC6", ok,
           detail + fmt(" p in 0..0.75 step 0.05: adaptive <= fixed k=2 up to 0.7, max L/(k*lambda*h/(k-1))=%.3f (<2)",
                        worst_ratio));
}

// Quarantine properties on random timelines, and pipeline-driven simulation.
void ac7() {
    const LikedOnlyResolver resolver;
    std::mt19937_64 gen(31);
    const double dq = kQuarantine;
    int violations = 0;
    std::size_t lone = 0;
    const int timelines = 10000;
    for (int trial = 0; trial < timelines; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 12);
        const int keys = 1 + static_cast<int>(gen() % 5);
        std::vector<ScriptedTx> script;
        std::vector<oracle::Tx> txs;
        for (int i = 0; i < n; ++i) {
            const double t = 0.125 * dq * static_cast<double>(gen() % 48);
            const auto key = static_cast<ConflictKey>(gen() % keys);
            script.push_back({static_cast<TxId>(i), key, t});
            txs.push_back({static_cast<std::uint64_t>(i), key, t});
        }
        const auto got = replay_script(script, dq, resolver);
        const auto want = oracle::timeline(txs, dq);
        std::map<ConflictKey, int> liked, admitted, members;
        for (const auto& s : script) ++members[s.conflict_key];
        for (const auto& e : got.entries) {
            const auto& w = want.at(e.tx_id);
            const bool admitted_now = e.outcome == Outcome::AdmittedDirect || e.outcome == Outcome::AdmittedByResolver;
            if ((e.opinion == Opinion::Liked) != (w.opinion == oracle::Op::Liked)) ++violations;
            if ((e.outcome == Outcome::AdmittedDirect) != (w.outcome == oracle::Out::Direct)) ++violations;
            if ((e.outcome == Outcome::AdmittedByResolver) != (w.outcome == oracle::Out::ByResolver)) ++violations;
            if (e.opinion == Opinion::Liked) ++liked[e.conflict_key];
            if (admitted_now) ++admitted[e.conflict_key];
            if (members[e.conflict_key] == 1) {
                ++lone;
                if (e.outcome != Outcome::AdmittedDirect || !e.admission_time ||
                    *e.admission_time != e.arrival_time + dq) {
                    ++violations;
                }
            }
        }
        for (const auto& [k, c] : liked) violations += c > 1;
        for (const auto& [k, c] : admitted) violations += c > 1;
    }

    auto fixed = canonical_sim(0.5, 2);
    auto piped = fixed;
    piped.seed = 4242;
    piped.quarantine = QuarantineWiring{1, kBase, kQuarantine, 0.0};
    const double lf = run_simulation(fixed).mean_pool_size;
    const auto rp = run_simulation(piped);
    const double e = rel(rp.mean_pool_size, lf);
    report("AC7", violations == 0 && e <= 0.03 && rp.rejected == 0,
           fmt("%d timelines: %d rule violations, %zu lone txs admitted at arrival+d_Q; pipeline sim L=%.2f vs fixed "
               "delay L=%.2f, rel diff %.4f (<=0.03)",
               timelines, violations, lone, rp.mean_pool_size, lf, e));
}

// Byte-identical sweep CSV across two runs.
void ac8() {
    ExperimentConfig c;
    c.mode = Mode::Compare;
    c.arrivals = 200'000;
    c.seed = 42;
    const std::string a = format_csv(run_experiment(c));
    const std::string b = format_csv(run_experiment(c));
    c.adaptive = true;
    const std::string aa = format_csv(run_experiment(c));
    const std::string ab = format_csv(run_experiment(c));
    report("AC8", a == b && aa == ab,
           fmt("compare sweep (11 points, 2e5 arrivals) fixed-k and adaptive: CSVs identical across runs (%zu and %zu "
               "bytes)",
               a.size(), aa.size()));
}

// Exponential interarrival KS check of the generator.
void rng_check() {
    Rng rng(derive_seed(42, 0));
    const std::size_t n = 1'000'000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.exponential(kRate);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = -std::expm1(-kRate * xs[i]);
        ks = std::max({ks, std::abs((i + 1.0) / n - f), std::abs(f - static_cast<double>(i) / n)});
    }
    const double critical = 1.63 / std::sqrt(static_cast<double>(n));  // 1% level
    report("RNG", ks <= critical,
           fmt("1e6 exponential interarrivals at rate 200: KS=%.5f (<=%.5f, 1%% level)", ks, critical));
}

}  // namespace

int main() {
    rng_check();
    ac1();
    ac2();
    ac3();
    ac4();
    ac5();
    ac6();
    ac7();
    ac8();
    std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
