#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tippool {

using TxId = std::uint64_t;
using ConflictKey = std::uint64_t;

enum class Opinion { Unknown, Liked, Disliked };
enum class Outcome { Pending, AdmittedDirect, AdmittedByResolver, Rejected };

const char* to_string(Opinion o);
const char* to_string(Outcome o);

/// A value transaction held in quarantine.
struct QuarantineEntry {
    TxId tx_id = 0;
    ConflictKey conflict_key = 0;  ///< id of the consumed output
    double arrival_time = 0.0;
    double opinion_due = 0.0;    ///< arrival + d_Q/2
    double inclusion_due = 0.0;  ///< arrival + d_Q
    Opinion opinion = Opinion::Unknown;
    Outcome outcome = Outcome::Pending;
    std::optional<double> admission_time;  ///< set once released to the tip pool
};

/// Stands in for the voting filter. Given every member of a conflict set
/// (in arrival order) returns the single transaction to admit, or none.
class ConflictResolver {
public:
    virtual ~ConflictResolver() = default;
    virtual std::optional<TxId> resolve(std::span<const QuarantineEntry> conflict_set) const = 0;
};

/// Admits the unique Liked member if exactly one exists, otherwise nothing.
class LikedOnlyResolver final : public ConflictResolver {
public:
    std::optional<TxId> resolve(std::span<const QuarantineEntry> conflict_set) const override;
};

/// Timed opinion and tip-inclusion state machine for value transactions.
///
/// Driven by an external clock: every call carries a timestamp and
/// timestamps must not decrease. Conflict windows are closed at their upper
/// end, so an arrival at exactly arrival + d_Q/2 counts against the initial
/// opinion. At equal timestamps callers should deliver arrivals before
/// opinion checks and opinion checks before inclusion checks.
class QuarantinePipeline {
public:
    explicit QuarantinePipeline(double quarantine);

    double quarantine() const noexcept { return quarantine_; }

    /// Registers a transaction. It is Disliked immediately if its conflict
    /// set already has a member. Throws std::domain_error for a repeated tx_id.
    const QuarantineEntry& on_arrival(TxId tx_id, ConflictKey conflict_key, double t);

    /// Sets the initial opinion. t must equal the entry's opinion_due.
    /// Entries that were disliked on arrival are left unchanged.
    Opinion on_opinion_due(TxId tx_id, double t);

    /// Tip-inclusion check at t == inclusion_due. Returns tx_id if the
    /// transaction enters the tip pool now.
    std::optional<TxId> on_inclusion_due(TxId tx_id, double t, const ConflictResolver& resolver);

    /// Mean (admission - arrival) over directly admitted transactions.
    /// Throws std::domain_error if there are none.
    double effective_delay() const;

    const QuarantineEntry& entry(TxId tx_id) const;
    bool contains(TxId tx_id) const { return entries_.count(tx_id) != 0; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// All entries sorted by tx_id.
    std::vector<QuarantineEntry> snapshot() const;

private:
    struct ConflictSet {
        std::vector<TxId> members;  // arrival order
        bool resolved = false;
        std::optional<TxId> admitted;
    };

    QuarantineEntry& mutable_entry(TxId tx_id);
    void advance_clock(double t);
    std::optional<TxId> release(QuarantineEntry& e, double t);

    double quarantine_;
    double now_ = -std::numeric_limits<double>::infinity();
    std::unordered_map<TxId, QuarantineEntry> entries_;
    std::unordered_map<ConflictKey, ConflictSet> conflicts_;
    std::size_t direct_count_ = 0;
    double direct_delay_sum_ = 0.0;
};

/// A scripted transaction for deterministic replays.
struct ScriptedTx {
    TxId tx_id;
    ConflictKey conflict_key;
    double arrival_time;
};

struct TranscriptLine {
    double time;
    TxId tx_id;
    std::string event;  ///< "arrival", "opinion" or "inclusion"
    Opinion opinion;
    Outcome outcome;
};

/// Replays a script through a fresh pipeline in event-time order and
/// records every state change. Returns the transcript and the final entries.
struct ReplayResult {
    std::vector<TranscriptLine> transcript;
    std::vector<QuarantineEntry> entries;
};

ReplayResult replay_script(std::span<const ScriptedTx> script, double quarantine,
                           const ConflictResolver& resolver);

std::string format_transcript(std::span<const TranscriptLine> transcript);

}  // namespace tippool
