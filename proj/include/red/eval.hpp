#ifndef RED_EVAL_HPP
#define RED_EVAL_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/errors.hpp"
#include "red/scoring.hpp"
#include "red/util.hpp"

namespace red::eval {

struct ConfusionCounts {
    size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Stored in [0,1]; reported x100.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Empty denominators report 0 rather than erroring, so sweeps stay total.
inline double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

inline double f1_from(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline ClassMetrics metrics_from_counts(const ConfusionCounts& c) {
    ClassMetrics m;
    m.precision = safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    m.recall = safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    m.f1 = f1_from(m.precision, m.recall);
    return m;
}

struct ClassificationReport {
    ClassMetrics depressed;
    ClassMetrics control;
    double macro_f1 = 0.0;
    ConfusionCounts depressed_counts;  // with depressed as the positive class
    size_t sessions = 0;
};

using LabeledSessions = std::vector<std::pair<std::string, scoring::Label>>;

// Per-class precision/recall/F1 with each class as positive in turn;
// macro F1 is the arithmetic mean of the two class F1s.
inline ClassificationReport classification_metrics(const LabeledSessions& predictions,
                                                   const LabeledSessions& golds) {
    std::map<std::string, scoring::Label> gold_by_id;
    for (const auto& [id, label] : golds)
        if (!gold_by_id.emplace(id, label).second)
            throw SessionMismatch("duplicate gold session: " + id);
    std::set<std::string> seen;
    if (predictions.size() != gold_by_id.size())
        throw SessionMismatch("prediction and gold session sets differ in size");

    ConfusionCounts dep;  // depressed as positive
    for (const auto& [id, predicted] : predictions) {
        if (!seen.insert(id).second) throw SessionMismatch("duplicate predicted session: " + id);
        auto it = gold_by_id.find(id);
        if (it == gold_by_id.end()) throw SessionMismatch("no gold label for session: " + id);
        bool pred_pos = predicted == scoring::Label::depressed;
        bool gold_pos = it->second == scoring::Label::depressed;
        if (pred_pos && gold_pos)
            ++dep.tp;
        else if (pred_pos && !gold_pos)
            ++dep.fp;
        else if (!pred_pos && gold_pos)
            ++dep.fn;
        else
            ++dep.tn;
    }

    ClassificationReport report;
    report.depressed_counts = dep;
    report.sessions = predictions.size();
    report.depressed = metrics_from_counts(dep);
    // Control as positive is the mirrored confusion matrix.
    ConfusionCounts con{dep.tn, dep.fn, dep.fp, dep.tp};
    report.control = metrics_from_counts(con);
    report.macro_f1 = (report.depressed.f1 + report.control.f1) / 2.0;
    return report;
}

struct EvidenceGold {
    std::string session_id;
    std::set<int> gold_turn_indices;
};

// Turn-level set precision/recall/F1 of retrieved evidence against gold
// annotations. Retrieved chunks are expanded to turn indices upstream.
inline ClassMetrics evidence_metrics(const std::set<int>& retrieved_turns,
                                     const EvidenceGold& gold) {
    if (gold.gold_turn_indices.empty())
        throw EmptyGold("no gold evidence for session " + gold.session_id);
    size_t hit = 0;
    for (int t : retrieved_turns)
        if (gold.gold_turn_indices.count(t)) ++hit;
    ClassMetrics m;
    m.precision = safe_div(static_cast<double>(hit), static_cast<double>(retrieved_turns.size()));
    m.recall =
        safe_div(static_cast<double>(hit), static_cast<double>(gold.gold_turn_indices.size()));
    m.f1 = f1_from(m.precision, m.recall);
    return m;
}

struct SweepRow {
    int threshold = 0;
    ClassificationReport metrics;
};

// Re-labels each session total at every threshold and reports the
// classification metrics per row.
inline std::vector<SweepRow> threshold_sweep(
    const std::vector<std::pair<std::string, int>>& session_totals, const LabeledSessions& golds,
    const std::vector<int>& thresholds) {
    std::vector<SweepRow> rows;
    for (int threshold : thresholds) {
        LabeledSessions predictions;
        predictions.reserve(session_totals.size());
        for (const auto& [id, total] : session_totals)
            predictions.emplace_back(id, scoring::classify(total, threshold));
        rows.push_back(SweepRow{threshold, classification_metrics(predictions, golds)});
    }
    return rows;
}

struct GoldLabel {
    std::string session_id;
    int phq8_total = -1;  // -1 when absent
    scoring::Label label = scoring::Label::control;
};

// Gold-label file: one JSON record per line {session_id, phq8_total, label}.
inline std::vector<GoldLabel> load_gold_labels(std::string_view raw) {
    std::vector<GoldLabel> out;
    int line_no = 0;
    for (const auto& line : util::split_lines(raw)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw MalformedRecord("gold record is not a JSON object", line_no);
        GoldLabel g;
        g.session_id = j.at("session_id").get<std::string>();
        g.phq8_total = j.value("phq8_total", -1);
        g.label = scoring::parse_label(j.at("label").get<std::string>());
        out.push_back(std::move(g));
    }
    return out;
}

// Evidence-gold file: one JSON record per line {session_id, turn_indices}.
inline std::vector<EvidenceGold> load_evidence_gold(std::string_view raw) {
    std::vector<EvidenceGold> out;
    int line_no = 0;
    for (const auto& line : util::split_lines(raw)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw MalformedRecord("evidence-gold record is not a JSON object", line_no);
        EvidenceGold g;
        g.session_id = j.at("session_id").get<std::string>();
        for (const auto& t : j.at("turn_indices")) g.gold_turn_indices.insert(t.get<int>());
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace red::eval

#endif  // RED_EVAL_HPP
