#include "tippool/tangle_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <queue>
#include <stdexcept>
#include <thread>

#include "tippool/quarantine.hpp"
#include "tippool/rng.hpp"

namespace tippool {

namespace {

// Per-run random streams.
enum Stream : std::uint64_t { kArrivalStream = 0, kSelectionStream = 1, kConflictStream = 2 };

// Event kinds, in tie-break order at equal timestamps.
enum class EventKind : std::uint8_t { Reveal = 0, QuarantineArrival = 1, OpinionDue = 2, InclusionDue = 3 };

struct Event {
    double time;
    EventKind kind;
    MessageId id;

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (kind != o.kind) return kind > o.kind;
        return id > o.id;
    }
};

// Tip pool with O(1) insert, erase and indexed access. Erase swaps the last
// member into the hole, so member order is a pure function of the operation
// sequence.
class TipPool {
public:
    explicit TipPool(std::size_t capacity) : slot_(capacity, kAbsent) {}

    void insert(MessageId id) {
        slot_[id] = static_cast<std::int64_t>(members_.size());
        members_.push_back(id);
    }

    bool erase(MessageId id) {
        const std::int64_t s = slot_[id];
        if (s == kAbsent) return false;
        const MessageId last = members_.back();
        members_[static_cast<std::size_t>(s)] = last;
        slot_[last] = s;
        members_.pop_back();
        slot_[id] = kAbsent;
        return true;
    }

    std::size_t size() const noexcept { return members_.size(); }
    MessageId operator[](std::size_t i) const { return members_[i]; }

private:
    static constexpr std::int64_t kAbsent = -1;
    std::vector<std::int64_t> slot_;
    std::vector<MessageId> members_;
};

// Draws min(k, n) distinct indices from [0, n) with Floyd's algorithm.
template <class Gen>
void sample_distinct(Gen& rng, std::size_t n, std::size_t k, std::vector<std::size_t>& out) {
    out.clear();
    const std::size_t m = std::min(k, n);
    for (std::size_t j = n - m; j < n; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.index(j + 1));
        if (std::find(out.begin(), out.end(), t) == out.end()) {
            out.push_back(t);
        } else {
            out.push_back(j);
        }
    }
}

}  // namespace

void SimConfig::validate() const {
    params.validate();
    if (total_arrivals < 1) throw std::invalid_argument("total_arrivals must be >= 1");
    if (total_arrivals >= std::numeric_limits<MessageId>::max()) {
        throw std::invalid_argument("total_arrivals exceeds the message id range");
    }
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
        throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
    }
    if (quarantine) {
        const auto& q = *quarantine;
        if (q.value_class >= params.classes.size()) throw std::invalid_argument("quarantine value_class out of range");
        if (!(q.base_delay >= 0.0) || !(q.quarantine >= 0.0)) {
            throw std::invalid_argument("quarantine delays must be >= 0");
        }
        const double d = params.classes[q.value_class].delay;
        if (std::abs(d - (q.base_delay + q.quarantine)) > 1e-9 * std::max(1.0, d)) {
            throw std::invalid_argument("value class delay must equal base_delay + quarantine");
        }
        if (!(q.conflict_fraction >= 0.0 && q.conflict_fraction <= 1.0)) {
            throw std::invalid_argument("conflict_fraction must lie in [0, 1]");
        }
    }
}

unsigned SimResult::dominant_parent_count() const {
    unsigned best = 0;
    std::uint64_t best_count = 0;
    for (const auto& [k, count] : parent_count_histogram) {
        if (count > best_count) {
            best = k;
            best_count = count;
        }
    }
    return best;
}

SimResult run_simulation(const SimConfig& config) {
    config.validate();
    const auto& classes = config.params.classes;
    const std::size_t n_classes = classes.size();
    const std::size_t n_messages = static_cast<std::size_t>(config.total_arrivals) + 1;

    Rng arrival_rng(derive_seed(config.seed, kArrivalStream));
    const std::uint64_t selection_seed = derive_seed(config.seed, kSelectionStream);
    Rng conflict_rng(derive_seed(config.seed, kConflictStream));

    SimResult result;
    result.arrivals_by_class.assign(n_classes, 0);

    // Arrivals: Poisson process of the total rate, thinned into classes.
    std::vector<double> cumulative(n_classes);
    std::size_t last_active = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_classes; ++i) {
        acc += classes[i].fraction;
        cumulative[i] = acc;
        if (classes[i].fraction > 0.0) last_active = i;
    }

    std::vector<double> issue(n_messages, 0.0);
    std::vector<std::uint32_t> class_of(n_messages, 0);
    double clock = 0.0;
    for (std::size_t j = 1; j < n_messages; ++j) {
        clock += arrival_rng.exponential(config.params.rate);
        issue[j] = clock;
        const double u = arrival_rng.uniform();
        std::size_t c = 0;
        while (c < n_classes && !(u < cumulative[c])) ++c;
        if (c == n_classes) c = last_active;
        class_of[j] = static_cast<std::uint32_t>(c);
        ++result.arrivals_by_class[c];
    }
    result.last_arrival = issue.back();
    result.warmup_end = config.warmup_fraction * result.last_arrival;
    const double window_lo = result.warmup_end;
    const double window_hi = result.last_arrival;

    std::vector<double> reveal(n_messages, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> parent_offset(n_messages + 1, 0);
    std::vector<MessageId> parents;
    parents.reserve(n_messages * 2);  // genesis owns the empty range [0, 0)

    TipPool pool(n_messages);
    reveal[kGenesis] = 0.0;
    pool.insert(kGenesis);
    result.revealed = 1;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;

    ParentCountFn parent_count = config.parent_policy ? config.parent_policy() : ParentCountFn{};

    std::optional<QuarantinePipeline> pipeline;
    const LikedOnlyResolver resolver;
    std::vector<ConflictKey> conflict_key;
    if (config.quarantine) {
        pipeline.emplace(config.quarantine->quarantine);
        conflict_key.assign(n_messages, 0);
    }
    std::optional<ConflictKey> last_value_key;

    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t samples = 0;

    const auto reveal_message = [&](MessageId id, double t) {
        reveal[id] = t;
        ++result.revealed;
        pool.insert(id);
        const bool in_window = t >= window_lo;
        for (std::size_t i = parent_offset[id]; i < parent_offset[id + 1]; ++i) {
            const MessageId parent = parents[i];
            if (!pool.erase(parent)) continue;
            ++result.removed;
            if (config.record_removal_times && in_window) result.removal_times.push_back(t - reveal[parent]);
        }
        if (in_window && t <= window_hi) {
            const auto size = static_cast<double>(pool.size());
            ++samples;
            const double delta = size - mean;
            mean += delta / static_cast<double>(samples);
            m2 += delta * (size - mean);
            if (config.series_stride != 0 && (samples - 1) % config.series_stride == 0) {
                result.pool_size_series.push_back({t, static_cast<std::uint32_t>(pool.size())});
            }
        }
    };

    const auto process = [&](const Event& ev) {
        switch (ev.kind) {
            case EventKind::Reveal:
                reveal_message(ev.id, ev.time);
                break;
            case EventKind::QuarantineArrival: {
                const auto& e = pipeline->on_arrival(ev.id, conflict_key[ev.id], ev.time);
                events.push({e.opinion_due, EventKind::OpinionDue, ev.id});
                events.push({e.inclusion_due, EventKind::InclusionDue, ev.id});
                break;
            }
            case EventKind::OpinionDue:
                pipeline->on_opinion_due(ev.id, ev.time);
                break;
            case EventKind::InclusionDue:
                if (pipeline->on_inclusion_due(ev.id, ev.time, resolver)) {
                    reveal_message(ev.id, ev.time);
                } else if (pipeline->entry(ev.id).outcome == Outcome::Rejected) {
                    ++result.rejected;
                }
                break;
        }
    };

    std::vector<std::size_t> picks;
    for (std::size_t j = 1; j < n_messages; ++j) {
        const double t = issue[j];
        // Reveals at exactly the issue time are visible to the issuer.
        while (!events.empty() && events.top().time <= t) {
            const Event ev = events.top();
            events.pop();
            process(ev);
        }

        const std::size_t c = class_of[j];
        const unsigned k = parent_count ? parent_count(t, c) : classes[c].parent_count;
        if (t >= window_lo) ++result.parent_count_histogram[k];

        if (pool.size() == 0) {
            parents.push_back(kGenesis);
        } else {
            // Each message draws from its own substream, so runs that differ only in
            // some messages' k keep the same draws for every other message.
            SubstreamRng draw(derive_seed(selection_seed, j));
            sample_distinct(draw, pool.size(), k, picks);
            for (std::size_t idx : picks) parents.push_back(pool[idx]);
        }
        parent_offset[j + 1] = parents.size();

        const auto id = static_cast<MessageId>(j);
        if (pipeline && c == config.quarantine->value_class) {
            ConflictKey key = id;
            if (last_value_key && conflict_rng.bernoulli(config.quarantine->conflict_fraction)) {
                key = *last_value_key;
            }
            conflict_key[j] = key;
            last_value_key = key;
            events.push({t + config.quarantine->base_delay, EventKind::QuarantineArrival, id});
        } else {
            events.push({t + classes[c].delay, EventKind::Reveal, id});
        }
    }
    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        process(ev);
    }

    result.mean_pool_size = mean;
    result.pool_samples = samples;
    result.pool_size_stddev = samples > 1 ? std::sqrt(m2 / static_cast<double>(samples - 1)) : 0.0;
    result.final_pool_size = pool.size();

    if (config.record_messages) {
        result.messages.resize(n_messages);
        for (std::size_t j = 0; j < n_messages; ++j) {
            auto& m = result.messages[j];
            m.id = static_cast<MessageId>(j);
            m.class_index = class_of[j];
            m.issue_time = issue[j];
            m.reveal_time = reveal[j];
            if (j > 0) {
                m.parent_ids.assign(parents.begin() + static_cast<std::ptrdiff_t>(parent_offset[j]),
                                    parents.begin() + static_cast<std::ptrdiff_t>(parent_offset[j + 1]));
            }
        }
    }
    return result;
}

double empirical_removal_cdf(const SimResult& result, double x) {
    const auto& r = result.removal_times;
    if (r.empty()) throw std::domain_error("no removal times were recorded");
    const auto count = std::count_if(r.begin(), r.end(), [x](double v) { return v <= x; });
    return static_cast<double>(count) / static_cast<double>(r.size());
}

SimConfig with_value_fraction(const SimConfig& base, double p) {
    if (base.params.classes.size() != 2) throw std::domain_error("sweep requires exactly two delay classes");
    if (!(base.params.classes[0].delay <= base.params.classes[1].delay)) {
        throw std::domain_error("sweep requires the data class before the value class");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("value fraction must lie in [0, 1]");
    SimConfig cfg = base;
    cfg.params.classes[0].fraction = 1.0 - p;
    cfg.params.classes[1].fraction = p;
    return cfg;
}

std::vector<std::pair<double, SimResult>> sweep(const SimConfig& base, const std::vector<double>& fractions,
                                                unsigned threads) {
    std::vector<SimConfig> configs;
    configs.reserve(fractions.size());
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        configs.push_back(with_value_fraction(base, fractions[i]));
        configs.back().seed = derive_seed(base.seed, i);
    }

    std::vector<std::pair<double, SimResult>> out(fractions.size());
    std::vector<std::exception_ptr> errors(fractions.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                out[i] = {fractions[i], run_simulation(configs[i])};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace tippool
