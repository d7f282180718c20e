#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>

#include "oracles.hpp"
#include "tippool/quarantine.hpp"

using namespace tippool;

namespace {

const LikedOnlyResolver kResolver;

const QuarantineEntry& find(const ReplayResult& r, TxId id) {
    for (const auto& e : r.entries) {
        if (e.tx_id == id) return e;
    }
    throw std::out_of_range("tx not in replay");
}

class AlwaysFirst final : public ConflictResolver {
public:
    std::optional<TxId> resolve(std::span<const QuarantineEntry> set) const override { return set.front().tx_id; }
};

// Runs arrivals and both checkpoints in time order; ties go arrival, opinion, inclusion.
void drive(QuarantinePipeline& q, const std::vector<ScriptedTx>& script) {
    std::multimap<std::pair<double, int>, std::size_t> agenda;
    for (std::size_t i = 0; i < script.size(); ++i) agenda.emplace(std::make_pair(script[i].arrival_time, 0), i);
    while (!agenda.empty()) {
        const auto it = agenda.begin();
        const auto [when, kind] = it->first;
        const ScriptedTx& s = script[it->second];
        const std::size_t idx = it->second;
        agenda.erase(it);
        if (kind == 0) {
            const auto& e = q.on_arrival(s.tx_id, s.conflict_key, when);
            agenda.emplace(std::make_pair(e.opinion_due, 1), idx);
            agenda.emplace(std::make_pair(e.inclusion_due, 2), idx);
        } else if (kind == 1) {
            q.on_opinion_due(s.tx_id, when);
        } else {
            q.on_inclusion_due(s.tx_id, when, kResolver);
        }
    }
}

class Outsider final : public ConflictResolver {
public:
    std::optional<TxId> resolve(std::span<const QuarantineEntry>) const override { return 999; }
};

}  // namespace

TEST_CASE("on_arrival") {
    QuarantinePipeline q(4.0);
    const auto& first = q.on_arrival(1, 100, 0.0);
    CHECK(first.opinion == Opinion::Unknown);
    CHECK(first.opinion_due == 2.0);
    CHECK(first.inclusion_due == 4.0);
    CHECK(first.outcome == Outcome::Pending);

    CHECK(q.on_arrival(2, 100, 1.0).opinion == Opinion::Disliked);
    CHECK(q.on_arrival(3, 200, 1.0).opinion == Opinion::Unknown);
    CHECK_THROWS_AS(q.on_arrival(1, 300, 1.5), std::domain_error);
    CHECK_THROWS_AS(q.on_arrival(4, 300, 0.5), std::domain_error);
}

TEST_CASE("on_opinion_due") {
    SUBCASE("no conflict") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        CHECK(q.on_opinion_due(1, 2.0) == Opinion::Liked);
    }
    SUBCASE("conflict inside the window") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_arrival(2, 1, 1.0);
        CHECK(q.on_opinion_due(1, 2.0) == Opinion::Disliked);
    }
    SUBCASE("conflict exactly at the window edge counts") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_arrival(2, 1, 2.0);
        CHECK(q.on_opinion_due(1, 2.0) == Opinion::Disliked);
    }
    SUBCASE("conflict after the window") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        CHECK(q.on_opinion_due(1, 2.0) == Opinion::Liked);
        q.on_arrival(2, 1, 3.0);
        CHECK(q.entry(1).opinion == Opinion::Liked);
    }
    SUBCASE("wrong time") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        CHECK_THROWS_AS(q.on_opinion_due(1, 1.5), std::domain_error);
        CHECK_THROWS_AS(q.on_opinion_due(7, 2.0), std::domain_error);
    }
}

TEST_CASE("on_inclusion_due") {
    SUBCASE("lone transaction is admitted at arrival + d_Q") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.5);
        q.on_opinion_due(1, 2.5);
        const auto admitted = q.on_inclusion_due(1, 4.5, kResolver);
        REQUIRE(admitted);
        CHECK(*admitted == 1);
        CHECK(q.entry(1).outcome == Outcome::AdmittedDirect);
        CHECK(*q.entry(1).admission_time == 4.5);
        CHECK(q.effective_delay() == 4.0);
    }
    SUBCASE("liked transaction wins through the resolver") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_opinion_due(1, 2.0);
        q.on_arrival(2, 1, 3.0);
        CHECK(q.on_inclusion_due(1, 4.0, kResolver) == std::optional<TxId>{1});
        CHECK(q.entry(1).outcome == Outcome::AdmittedByResolver);
        CHECK(q.entry(2).outcome == Outcome::Rejected);
        q.on_opinion_due(2, 5.0);
        CHECK_FALSE(q.on_inclusion_due(2, 7.0, kResolver));
        CHECK(q.entry(2).outcome == Outcome::Rejected);
        CHECK_THROWS_AS(q.effective_delay(), std::domain_error);
    }
    SUBCASE("both disliked are both rejected") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_arrival(2, 1, 1.0);
        q.on_opinion_due(1, 2.0);
        q.on_opinion_due(2, 3.0);
        CHECK_FALSE(q.on_inclusion_due(1, 4.0, kResolver));
        CHECK_FALSE(q.on_inclusion_due(2, 5.0, kResolver));
        CHECK(q.entry(1).outcome == Outcome::Rejected);
        CHECK(q.entry(2).outcome == Outcome::Rejected);
    }
    SUBCASE("late double spend after a direct admission is rejected") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_opinion_due(1, 2.0);
        CHECK(q.on_inclusion_due(1, 4.0, kResolver));
        q.on_arrival(2, 1, 6.0);
        q.on_opinion_due(2, 8.0);
        CHECK_FALSE(q.on_inclusion_due(2, 10.0, kResolver));
        CHECK(q.entry(2).outcome == Outcome::Rejected);
    }
    SUBCASE("resolver picking a later member releases it at its own checkpoint") {
        class PickSecond final : public ConflictResolver {
        public:
            std::optional<TxId> resolve(std::span<const QuarantineEntry> set) const override { return set[1].tx_id; }
        };
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_arrival(2, 1, 1.0);
        q.on_opinion_due(1, 2.0);
        q.on_opinion_due(2, 3.0);
        CHECK_FALSE(q.on_inclusion_due(1, 4.0, PickSecond{}));
        CHECK(q.entry(2).outcome == Outcome::AdmittedByResolver);
        CHECK_FALSE(q.entry(2).admission_time);
        CHECK(q.on_inclusion_due(2, 5.0, PickSecond{}) == std::optional<TxId>{2});
        CHECK(*q.entry(2).admission_time == 5.0);
    }
    SUBCASE("resolver must stay inside the conflict set") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        q.on_arrival(2, 1, 1.0);
        q.on_opinion_due(1, 2.0);
        CHECK_THROWS_AS(q.on_inclusion_due(1, 4.0, Outsider{}), std::logic_error);
    }
    SUBCASE("wrong time") {
        QuarantinePipeline q(4.0);
        q.on_arrival(1, 1, 0.0);
        CHECK_THROWS_AS(q.on_inclusion_due(1, 3.0, kResolver), std::domain_error);
    }
}

TEST_CASE("LikedOnlyResolver") {
    std::vector<QuarantineEntry> set(3);
    for (std::size_t i = 0; i < set.size(); ++i) {
        set[i].tx_id = i + 10;
        set[i].opinion = Opinion::Disliked;
    }
    CHECK_FALSE(kResolver.resolve(set));
    set[1].opinion = Opinion::Liked;
    CHECK(kResolver.resolve(set) == std::optional<TxId>{11});
    set[2].opinion = Opinion::Liked;
    CHECK_FALSE(kResolver.resolve(set));
}

TEST_CASE("effective delay") {
    SUBCASE("non-conflicting traffic") {
        std::vector<ScriptedTx> script;
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> gap(0.0, 0.01);
        double t = 0.0;
        for (TxId i = 0; i < 1000; ++i) {
            t += gap(gen);
            script.push_back({i, i, t});
        }
        QuarantinePipeline q(4.0);
        drive(q, script);
        for (TxId i = 0; i < 1000; ++i) {
            REQUIRE(q.entry(i).outcome == Outcome::AdmittedDirect);
            REQUIRE(*q.entry(i).admission_time == q.entry(i).arrival_time + 4.0);
        }
        CHECK(q.effective_delay() == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("integer arrival times give exactly d_Q") {
        std::vector<ScriptedTx> script;
        for (TxId i = 0; i < 1000; ++i) script.push_back({i, i, static_cast<double>(i)});
        QuarantinePipeline q(4.0);
        drive(q, script);
        CHECK(q.effective_delay() == 4.0);
    }
    SUBCASE("conflicts do not enter the statistic") {
        std::vector<ScriptedTx> script;
        for (TxId i = 0; i < 1000; ++i) {
            const bool conflict = i % 100 == 99;
            script.push_back({i, conflict ? i - 1 : i, static_cast<double>(i)});
        }
        QuarantinePipeline q(4.0);
        drive(q, script);
        CHECK(q.effective_delay() == 4.0);
        CHECK(q.entry(99).outcome == Outcome::Rejected);
    }
    SUBCASE("zero quarantine") {
        QuarantinePipeline q(0.0);
        q.on_arrival(1, 1, 3.0);
        q.on_opinion_due(1, 3.0);
        CHECK(q.on_inclusion_due(1, 3.0, kResolver));
        CHECK(q.effective_delay() == 0.0);
    }
}

TEST_CASE("replay transcripts") {
    SUBCASE("double spend inside the opinion window") {
        const std::vector<ScriptedTx> script{{1, 7, 0.0}, {2, 7, 1.0}};
        const auto r = replay_script(script, 4.0, kResolver);
        CHECK(find(r, 1).opinion == Opinion::Disliked);
        CHECK(find(r, 2).opinion == Opinion::Disliked);
        CHECK(find(r, 1).outcome == Outcome::Rejected);
        CHECK(find(r, 2).outcome == Outcome::Rejected);
        REQUIRE(r.transcript.size() == 6);
        CHECK(r.transcript[1].time == 1.0);
        CHECK(r.transcript[1].opinion == Opinion::Disliked);
    }
    SUBCASE("double spend after the opinion window") {
        const std::vector<ScriptedTx> script{{1, 7, 0.0}, {2, 7, 3.0}};
        const auto r = replay_script(script, 4.0, kResolver);
        CHECK(r.transcript[1].time == 2.0);
        CHECK(r.transcript[1].event == "opinion");
        CHECK(r.transcript[1].opinion == Opinion::Liked);
        CHECK(find(r, 1).outcome == Outcome::AdmittedByResolver);
        CHECK(*find(r, 1).admission_time == 4.0);
        CHECK(find(r, 2).outcome == Outcome::Rejected);
        const std::string text = format_transcript(r.transcript);
        CHECK(text.find("t=4.000 tx=1 inclusion opinion=Liked    outcome=AdmittedByResolver") != std::string::npos);
    }
}

TEST_CASE("random timelines agree with the brute-force oracle") {
    std::mt19937_64 gen(17);
    const double dq = 4.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 12);
        const int keys = 1 + static_cast<int>(gen() % 4);
        std::vector<ScriptedTx> script;
        std::vector<oracle::Tx> txs;
        for (int i = 0; i < n; ++i) {
            // Grid of d_Q/8 so ties and window edges occur often.
            const double t = 0.5 * static_cast<double>(gen() % 40);
            const auto key = static_cast<ConflictKey>(gen() % keys);
            script.push_back({static_cast<TxId>(i), key, t});
            txs.push_back({static_cast<std::uint64_t>(i), key, t});
        }
        const auto got = replay_script(script, dq, kResolver);
        const auto want = oracle::timeline(txs, dq);

        std::map<ConflictKey, int> liked, admitted;
        for (const auto& e : got.entries) {
            const auto& w = want.at(e.tx_id);
            REQUIRE(e.opinion == (w.opinion == oracle::Op::Liked ? Opinion::Liked : Opinion::Disliked));
            const Outcome expected = w.outcome == oracle::Out::Direct       ? Outcome::AdmittedDirect
                                     : w.outcome == oracle::Out::ByResolver ? Outcome::AdmittedByResolver
                                                                            : Outcome::Rejected;
            REQUIRE(e.outcome == expected);
            if (e.opinion == Opinion::Liked) ++liked[e.conflict_key];
            if (e.outcome == Outcome::AdmittedDirect || e.outcome == Outcome::AdmittedByResolver) {
                ++admitted[e.conflict_key];
                REQUIRE(e.admission_time);
                if (e.outcome == Outcome::AdmittedDirect) REQUIRE(*e.admission_time == e.arrival_time + dq);
            }
        }
        for (const auto& [k, c] : liked) REQUIRE(c <= 1);
        for (const auto& [k, c] : admitted) REQUIRE(c <= 1);

        // Outcomes never change after leaving Pending.
        std::map<TxId, Outcome> seen;
        for (const auto& line : got.transcript) {
            auto it = seen.find(line.tx_id);
            if (it != seen.end() && it->second != Outcome::Pending) REQUIRE(line.outcome == it->second);
            seen[line.tx_id] = line.outcome;
        }
    }
}

TEST_CASE("custom resolver still admits at most one per set") {
    const std::vector<ScriptedTx> script{{1, 5, 0.0}, {2, 5, 0.5}, {3, 5, 1.0}, {4, 5, 9.0}};
    const auto r = replay_script(script, 4.0, AlwaysFirst{});
    int admitted = 0;
    for (const auto& e : r.entries) {
        if (e.outcome == Outcome::AdmittedByResolver || e.outcome == Outcome::AdmittedDirect) ++admitted;
    }
    CHECK(admitted == 1);
    CHECK(find(r, 1).outcome == Outcome::AdmittedByResolver);
    CHECK(find(r, 4).outcome == Outcome::Rejected);
}
