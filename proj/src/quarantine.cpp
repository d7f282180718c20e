#include "tippool/quarantine.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace tippool {

const char* to_string(Opinion o) {
    switch (o) {
        case Opinion::Unknown: return "Unknown";
        case Opinion::Liked: return "Liked";
        case Opinion::Disliked: return "Disliked";
    }
    return "?";
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Pending: return "Pending";
        case Outcome::AdmittedDirect: return "AdmittedDirect";
        case Outcome::AdmittedByResolver: return "AdmittedByResolver";
        case Outcome::Rejected: return "Rejected";
    }
    return "?";
}

std::optional<TxId> LikedOnlyResolver::resolve(std::span<const QuarantineEntry> conflict_set) const {
    std::optional<TxId> liked;
    for (const auto& e : conflict_set) {
        if (e.opinion != Opinion::Liked) continue;
        if (liked) return std::nullopt;
        liked = e.tx_id;
    }
    return liked;
}

QuarantinePipeline::QuarantinePipeline(double quarantine) : quarantine_(quarantine) {
    if (!(quarantine >= 0.0) || !std::isfinite(quarantine)) {
        throw std::invalid_argument("quarantine must be finite and >= 0");
    }
}

void QuarantinePipeline::advance_clock(double t) {
    if (!std::isfinite(t)) throw std::domain_error("pipeline time must be finite");
    if (t < now_) throw std::domain_error("pipeline time must not decrease");
    now_ = t;
}

QuarantineEntry& QuarantinePipeline::mutable_entry(TxId tx_id) {
    auto it = entries_.find(tx_id);
    if (it == entries_.end()) throw std::domain_error("unknown tx_id " + std::to_string(tx_id));
    return it->second;
}

const QuarantineEntry& QuarantinePipeline::entry(TxId tx_id) const {
    auto it = entries_.find(tx_id);
    if (it == entries_.end()) throw std::domain_error("unknown tx_id " + std::to_string(tx_id));
    return it->second;
}

const QuarantineEntry& QuarantinePipeline::on_arrival(TxId tx_id, ConflictKey conflict_key, double t) {
    if (entries_.count(tx_id) != 0) throw std::domain_error("duplicate tx_id " + std::to_string(tx_id));
    advance_clock(t);

    QuarantineEntry e;
    e.tx_id = tx_id;
    e.conflict_key = conflict_key;
    e.arrival_time = t;
    e.opinion_due = t + 0.5 * quarantine_;
    e.inclusion_due = t + quarantine_;

    auto& set = conflicts_[conflict_key];
    if (!set.members.empty()) e.opinion = Opinion::Disliked;
    set.members.push_back(tx_id);
    return entries_.emplace(tx_id, e).first->second;
}

Opinion QuarantinePipeline::on_opinion_due(TxId tx_id, double t) {
    auto& e = mutable_entry(tx_id);
    if (t != e.opinion_due) throw std::domain_error("opinion check invoked at the wrong time");
    advance_clock(t);
    if (e.opinion != Opinion::Unknown) return e.opinion;

    const auto& set = conflicts_.at(e.conflict_key);
    const bool conflicted = std::any_of(set.members.begin(), set.members.end(), [&](TxId other) {
        if (other == tx_id) return false;
        const double a = entries_.at(other).arrival_time;
        return a >= e.arrival_time && a <= e.opinion_due;
    });
    e.opinion = conflicted ? Opinion::Disliked : Opinion::Liked;
    return e.opinion;
}

std::optional<TxId> QuarantinePipeline::release(QuarantineEntry& e, double t) {
    e.admission_time = t;
    if (e.outcome == Outcome::AdmittedDirect) {
        ++direct_count_;
        direct_delay_sum_ += t - e.arrival_time;
    }
    return e.tx_id;
}

std::optional<TxId> QuarantinePipeline::on_inclusion_due(TxId tx_id, double t,
                                                         const ConflictResolver& resolver) {
    auto& e = mutable_entry(tx_id);
    if (t != e.inclusion_due) throw std::domain_error("inclusion check invoked at the wrong time");
    advance_clock(t);

    if (e.outcome != Outcome::Pending) {
        // Decided earlier while resolving another member of the set.
        if (e.outcome == Outcome::AdmittedByResolver && !e.admission_time) return release(e, t);
        return std::nullopt;
    }

    auto& set = conflicts_.at(e.conflict_key);
    const bool conflicted = std::any_of(set.members.begin(), set.members.end(), [&](TxId other) {
        return other != tx_id && entries_.at(other).arrival_time <= e.inclusion_due;
    });

    if (!conflicted) {
        e.outcome = Outcome::AdmittedDirect;
        set.admitted = tx_id;
        return release(e, t);
    }

    if (set.admitted || set.resolved) {
        e.outcome = Outcome::Rejected;
        return std::nullopt;
    }

    std::vector<QuarantineEntry> members;
    members.reserve(set.members.size());
    for (TxId id : set.members) members.push_back(entries_.at(id));
    const std::optional<TxId> winner = resolver.resolve(members);
    if (winner && std::find(set.members.begin(), set.members.end(), *winner) == set.members.end()) {
        throw std::logic_error("resolver admitted a transaction outside the conflict set");
    }

    set.resolved = true;
    for (TxId id : set.members) {
        auto& m = entries_.at(id);
        if (m.outcome != Outcome::Pending) continue;
        m.outcome = (winner && id == *winner) ? Outcome::AdmittedByResolver : Outcome::Rejected;
    }
    if (winner && entries_.at(*winner).outcome == Outcome::AdmittedByResolver) set.admitted = winner;

    if (e.outcome == Outcome::AdmittedByResolver) return release(e, t);
    return std::nullopt;
}

double QuarantinePipeline::effective_delay() const {
    if (direct_count_ == 0) throw std::domain_error("no directly admitted transactions");
    return direct_delay_sum_ / static_cast<double>(direct_count_);
}

std::vector<QuarantineEntry> QuarantinePipeline::snapshot() const {
    std::vector<QuarantineEntry> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back(e);
    std::sort(out.begin(), out.end(),
              [](const QuarantineEntry& a, const QuarantineEntry& b) { return a.tx_id < b.tx_id; });
    return out;
}

ReplayResult replay_script(std::span<const ScriptedTx> script, double quarantine,
                           const ConflictResolver& resolver) {
    enum Kind : int { kArrival = 0, kOpinion = 1, kInclusion = 2 };
    using Event = std::tuple<double, int, TxId, std::size_t>;  // time, kind, tx, script index
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    for (std::size_t i = 0; i < script.size(); ++i) {
        queue.emplace(script[i].arrival_time, kArrival, script[i].tx_id, i);
    }

    QuarantinePipeline pipeline(quarantine);
    ReplayResult result;
    while (!queue.empty()) {
        const auto [time, kind, tx, index] = queue.top();
        queue.pop();
        switch (kind) {
            case kArrival: {
                const auto& e = pipeline.on_arrival(tx, script[index].conflict_key, time);
                queue.emplace(e.opinion_due, kOpinion, tx, index);
                queue.emplace(e.inclusion_due, kInclusion, tx, index);
                result.transcript.push_back({time, tx, "arrival", e.opinion, e.outcome});
                break;
            }
            case kOpinion: {
                pipeline.on_opinion_due(tx, time);
                const auto& e = pipeline.entry(tx);
                result.transcript.push_back({time, tx, "opinion", e.opinion, e.outcome});
                break;
            }
            default: {
                pipeline.on_inclusion_due(tx, time, resolver);
                const auto& e = pipeline.entry(tx);
                result.transcript.push_back({time, tx, "inclusion", e.opinion, e.outcome});
                break;
            }
        }
    }
    result.entries = pipeline.snapshot();
    return result;
}

std::string format_transcript(std::span<const TranscriptLine> transcript) {
    std::string out;
    char buf[160];
    for (const auto& line : transcript) {
        std::snprintf(buf, sizeof buf, "t=%.3f tx=%" PRIu64 " %-9s opinion=%-8s outcome=%s\n", line.time,
                      static_cast<std::uint64_t>(line.tx_id), line.event.c_str(), to_string(line.opinion),
                      to_string(line.outcome));
        out += buf;
    }
    return out;
}

}  // namespace tippool
