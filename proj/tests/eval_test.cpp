#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "red/eval.hpp"

using namespace red;
using scoring::Label;

namespace {

eval::LabeledSessions labeled(std::vector<std::pair<std::string, Label>> v) { return v; }

}  // namespace

TEST_CASE("f1_from reproduces published scores", "[eval]") {
    CHECK(eval::f1_from(59.64, 78.57) == Catch::Approx(67.81).margin(0.01));
    CHECK(eval::f1_from(86.78, 80.19) == Catch::Approx(83.35).margin(0.01));
    CHECK((87.83 + 92.17) / 2.0 == Catch::Approx(90.00).margin(0.01));
    CHECK(eval::f1_from(0.0, 0.0) == 0.0);
}

TEST_CASE("classification metrics from a hand confusion matrix", "[eval]") {
    auto preds = labeled({{"a", Label::depressed},
                          {"b", Label::depressed},
                          {"c", Label::control},
                          {"d", Label::control}});
    auto golds = labeled({{"a", Label::depressed},
                          {"b", Label::control},
                          {"c", Label::depressed},
                          {"d", Label::control}});
    auto report = eval::classification_metrics(preds, golds);
    CHECK(report.depressed.precision == Catch::Approx(0.5));
    CHECK(report.depressed.recall == Catch::Approx(0.5));
    CHECK(report.depressed.f1 == Catch::Approx(0.5));
    CHECK(report.control.precision == Catch::Approx(0.5));
    CHECK(report.control.recall == Catch::Approx(0.5));
    CHECK(report.control.f1 == Catch::Approx(0.5));
    CHECK(report.macro_f1 == Catch::Approx(0.5));
    CHECK(report.depressed_counts.tp == 1);
    CHECK(report.depressed_counts.fp == 1);
    CHECK(report.depressed_counts.fn == 1);
    CHECK(report.depressed_counts.tn == 1);
}

TEST_CASE("classification metrics validate session sets", "[eval]") {
    auto golds = labeled({{"a", Label::depressed}, {"b", Label::control}});
    CHECK_THROWS_AS(
        eval::classification_metrics(labeled({{"a", Label::depressed}}), golds),
        SessionMismatch);
    CHECK_THROWS_AS(eval::classification_metrics(
                        labeled({{"a", Label::depressed}, {"z", Label::control}}), golds),
                    SessionMismatch);
    CHECK_THROWS_AS(eval::classification_metrics(
                        labeled({{"a", Label::depressed}, {"a", Label::control}}), golds),
                    SessionMismatch);
}

TEST_CASE("metrics are invariant under session order", "[eval]") {
    auto preds = labeled({{"a", Label::depressed},
                          {"b", Label::control},
                          {"c", Label::depressed},
                          {"d", Label::control},
                          {"e", Label::depressed}});
    auto golds = labeled({{"a", Label::depressed},
                          {"b", Label::depressed},
                          {"c", Label::control},
                          {"d", Label::control},
                          {"e", Label::depressed}});
    auto base = eval::classification_metrics(preds, golds);
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(preds.begin(), preds.end(), rng);
        std::shuffle(golds.begin(), golds.end(), rng);
        auto shuffled = eval::classification_metrics(preds, golds);
        CHECK(shuffled.depressed.f1 == base.depressed.f1);
        CHECK(shuffled.control.f1 == base.control.f1);
        CHECK(shuffled.macro_f1 == base.macro_f1);
    }
}

TEST_CASE("evidence metrics fixtures", "[eval]") {
    eval::EvidenceGold gold{"s", {2, 3, 4, 5}};
    SECTION("perfect match") {
        eval::EvidenceGold same{"s", {1, 2, 3}};
        auto m = eval::evidence_metrics({1, 2, 3}, same);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.f1 == 1.0);
    }
    SECTION("partial overlap") {
        auto m = eval::evidence_metrics({1, 2, 3}, gold);
        CHECK(m.precision == Catch::Approx(2.0 / 3.0));
        CHECK(m.recall == Catch::Approx(0.5));
        CHECK(m.f1 == Catch::Approx(4.0 / 7.0));
    }
    SECTION("empty retrieval reports zeros") {
        auto m = eval::evidence_metrics({}, gold);
        CHECK(m.precision == 0.0);
        CHECK(m.recall == 0.0);
        CHECK(m.f1 == 0.0);
    }
    SECTION("empty gold is an error") {
        eval::EvidenceGold empty{"s", {}};
        CHECK_THROWS_AS(eval::evidence_metrics({1}, empty), EmptyGold);
    }
}

TEST_CASE("evidence metrics equal the brute-force oracle", "[eval][property]") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<int> retrieved, gold_set;
        size_t nr = rng() % 12, ng = 1 + rng() % 12;
        for (size_t i = 0; i < nr; ++i) retrieved.insert(static_cast<int>(rng() % 20));
        for (size_t i = 0; i < ng; ++i) gold_set.insert(static_cast<int>(rng() % 20));
        eval::EvidenceGold gold{"s", gold_set};
        auto m = eval::evidence_metrics(retrieved, gold);

        size_t inter = 0;
        for (int t : retrieved) inter += gold_set.count(t);
        double p = retrieved.empty() ? 0.0 : double(inter) / double(retrieved.size());
        double r = double(inter) / double(gold_set.size());
        CHECK(m.precision == p);
        CHECK(m.recall == r);
        CHECK(m.f1 == (p + r > 0 ? 2 * p * r / (p + r) : 0.0));
    }
}

TEST_CASE("threshold sweep on a single session", "[eval]") {
    std::vector<std::pair<std::string, int>> totals = {{"s1", 9}};
    auto golds = labeled({{"s1", Label::depressed}});
    auto rows = eval::threshold_sweep(totals, golds, {8, 10});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].threshold == 8);
    CHECK(rows[0].metrics.depressed.recall == 1.0);
    CHECK(rows[1].threshold == 10);
    CHECK(rows[1].metrics.depressed.recall == 0.0);

    CHECK(eval::threshold_sweep(totals, golds, {}).empty());
}

TEST_CASE("depressed recall never increases with the threshold", "[eval][property]") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<std::string, int>> totals;
        eval::LabeledSessions golds;
        size_t n = 3 + rng() % 20;
        for (size_t i = 0; i < n; ++i) {
            std::string id = "s" + std::to_string(i);
            totals.emplace_back(id, static_cast<int>(rng() % 25));
            golds.emplace_back(id, rng() % 2 ? Label::depressed : Label::control);
        }
        bool has_depressed = false;
        for (auto& [id, label] : golds) has_depressed |= label == Label::depressed;
        if (!has_depressed) golds[0].second = Label::depressed;

        std::vector<int> thresholds;
        for (int t = 1; t <= 24; ++t) thresholds.push_back(t);
        auto rows = eval::threshold_sweep(totals, golds, thresholds);
        for (size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i].metrics.depressed.recall <= rows[i - 1].metrics.depressed.recall);
    }
}

TEST_CASE("gold files parse", "[eval]") {
    auto golds = eval::load_gold_labels(
        "{\"session_id\":\"a\",\"phq8_total\":12,\"label\":\"depressed\"}\n"
        "{\"session_id\":\"b\",\"phq8_total\":3,\"label\":\"control\"}\n");
    REQUIRE(golds.size() == 2);
    CHECK(golds[0].phq8_total == 12);
    CHECK(golds[0].label == Label::depressed);

    auto evidence = eval::load_evidence_gold(
        "{\"session_id\":\"a\",\"turn_indices\":[1,2,5]}\n");
    REQUIRE(evidence.size() == 1);
    CHECK(evidence[0].gold_turn_indices == std::set<int>{1, 2, 5});
}
