#ifndef RED_REPORT_HPP
#define RED_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/agents.hpp"
#include "red/corpus.hpp"
#include "red/errors.hpp"
#include "red/evidence.hpp"
#include "red/scoring.hpp"
#include "red/socialint.hpp"
#include "red/util.hpp"

namespace red::cli {

struct AspectReport {
    scoring::Aspect aspect = scoring::Aspect::interest;
    retrieval::PersonalQuery personal_query;
    std::vector<retrieval::EvidenceItem> evidence;
    bool insufficient_evidence = false;
    agents::AspectAssessment preliminary;
    std::vector<socialint::KnowledgeAttachment> knowledge;
    int final_score = 0;
};

// The full per-session output. Evidence texts are verbatim chunk texts; the
// justification is free text but never a substitute for the citations.
struct DetectionReport {
    std::string run_id;
    std::string config_fingerprint;
    std::string session_id;
    std::string user_profile;
    std::vector<AspectReport> aspects;  // canonical aspect order
    std::vector<socialint::KnowledgeAttachment> pooled_knowledge;
    int total = 0;
    int threshold_used = 0;
    std::string label;
    bool final_fallback = false;
    std::string justification;
    bool redacted = false;

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["schema"] = "red.report.v1";
        j["run_id"] = run_id;
        j["config_fingerprint"] = config_fingerprint;
        j["session_id"] = session_id;
        j["user_profile"] = user_profile;
        j["aspects"] = nlohmann::ordered_json::array();
        for (const auto& a : aspects) {
            nlohmann::ordered_json ja;
            ja["aspect"] = scoring::aspect_name(a.aspect);
            ja["personal_query"] = {{"text", a.personal_query.text},
                                    {"fallback", a.personal_query.fallback}};
            ja["evidence"] = nlohmann::ordered_json::array();
            for (const auto& item : a.evidence) {
                nlohmann::ordered_json je;
                je["chunk_id"] = item.chunk_id;
                je["rank"] = item.rank;
                je["score"] = item.score;
                je["text"] = item.text;
                je["turn_begin"] = item.turn_begin;
                je["turn_end"] = item.turn_end;
                ja["evidence"].push_back(std::move(je));
            }
            ja["insufficient_evidence"] = a.insufficient_evidence;
            ja["preliminary"] = {{"score", a.preliminary.score},
                                 {"rationale", a.preliminary.rationale},
                                 {"fail_safe", a.preliminary.fail_safe}};
            ja["knowledge"] = nlohmann::ordered_json::array();
            for (const auto& att : a.knowledge) {
                ja["knowledge"].push_back({{"entry_id", att.entry_id},
                                           {"value", att.value},
                                           {"score", att.score}});
            }
            ja["final_score"] = a.final_score;
            j["aspects"].push_back(std::move(ja));
        }
        if (!pooled_knowledge.empty()) {
            j["pooled_knowledge"] = nlohmann::ordered_json::array();
            for (const auto& att : pooled_knowledge)
                j["pooled_knowledge"].push_back(
                    {{"entry_id", att.entry_id}, {"value", att.value}, {"score", att.score}});
        }
        j["total"] = total;
        j["threshold_used"] = threshold_used;
        j["label"] = label;
        j["final_fallback"] = final_fallback;
        j["justification"] = justification;
        j["redacted"] = redacted;
        return j.dump(2) + "\n";
    }

    static DetectionReport from_json(std::string_view raw) {
        nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
        if (j.is_discarded() || !j.is_object() || j.value("schema", "") != "red.report.v1")
            throw IoError("not a detection report");
        DetectionReport r;
        r.run_id = j.value("run_id", "");
        r.config_fingerprint = j.value("config_fingerprint", "");
        r.session_id = j.at("session_id").get<std::string>();
        r.user_profile = j.value("user_profile", "");
        for (const auto& ja : j.at("aspects")) {
            AspectReport a;
            a.aspect = scoring::parse_aspect(ja.at("aspect").get<std::string>());
            a.personal_query.aspect = a.aspect;
            a.personal_query.text = ja.at("personal_query").value("text", "");
            a.personal_query.fallback = ja.at("personal_query").value("fallback", false);
            for (const auto& je : ja.at("evidence")) {
                retrieval::EvidenceItem item;
                item.chunk_id = je.at("chunk_id").get<int>();
                item.aspect = a.aspect;
                item.rank = je.at("rank").get<int>();
                item.score = je.at("score").get<double>();
                item.text = je.value("text", "");
                item.turn_begin = je.value("turn_begin", 0);
                item.turn_end = je.value("turn_end", 0);
                a.evidence.push_back(std::move(item));
            }
            a.insufficient_evidence = ja.value("insufficient_evidence", false);
            a.preliminary.aspect = a.aspect;
            a.preliminary.score = ja.at("preliminary").value("score", 0);
            a.preliminary.rationale = ja.at("preliminary").value("rationale", "");
            a.preliminary.fail_safe = ja.at("preliminary").value("fail_safe", false);
            if (ja.contains("knowledge"))
                for (const auto& jk : ja["knowledge"])
                    a.knowledge.push_back({jk.at("entry_id").get<int>(),
                                           jk.value("value", ""),
                                           jk.value("score", 0.0)});
            a.final_score = ja.at("final_score").get<int>();
            r.aspects.push_back(std::move(a));
        }
        if (j.contains("pooled_knowledge"))
            for (const auto& jk : j["pooled_knowledge"])
                r.pooled_knowledge.push_back({jk.at("entry_id").get<int>(),
                                              jk.value("value", ""),
                                              jk.value("score", 0.0)});
        r.total = j.at("total").get<int>();
        r.threshold_used = j.at("threshold_used").get<int>();
        r.label = j.at("label").get<std::string>();
        r.final_fallback = j.value("final_fallback", false);
        r.justification = j.value("justification", "");
        r.redacted = j.value("redacted", false);
        return r;
    }

    // Replaces every evidence text with the chunk-content hash.
    DetectionReport redacted_copy() const {
        DetectionReport r = *this;
        for (auto& a : r.aspects)
            for (auto& item : a.evidence) item.text = "sha256:" + util::sha256_hex(item.text);
        r.redacted = true;
        return r;
    }
};

// Verifies the extractive-explanation guarantee: every evidence text equals
// the corresponding chunk text byte-for-byte (or its hash when redacted).
// Returns an explanation of the first violation, or nullopt when clean.
inline std::optional<std::string> audit_extractive(const DetectionReport& report,
                                                   const std::vector<corpus::Chunk>& chunks) {
    for (const auto& a : report.aspects) {
        for (const auto& item : a.evidence) {
            if (item.chunk_id < 0 || static_cast<size_t>(item.chunk_id) >= chunks.size())
                return "evidence cites unknown chunk " + std::to_string(item.chunk_id);
            const auto& chunk = chunks[static_cast<size_t>(item.chunk_id)];
            std::string expected =
                report.redacted ? "sha256:" + util::sha256_hex(chunk.text) : chunk.text;
            if (item.text != expected)
                return "evidence text for chunk " + std::to_string(item.chunk_id) +
                       " is not verbatim";
            if (item.turn_begin != chunk.turn_begin || item.turn_end != chunk.turn_end)
                return "evidence turn range mismatch for chunk " + std::to_string(item.chunk_id);
        }
    }
    return std::nullopt;
}

}  // namespace red::cli

#endif  // RED_REPORT_HPP
