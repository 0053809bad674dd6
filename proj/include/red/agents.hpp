#ifndef RED_AGENTS_HPP
#define RED_AGENTS_HPP

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/corpus.hpp"
#include "red/errors.hpp"
#include "red/evidence.hpp"
#include "red/llm.hpp"
#include "red/prompts.hpp"
#include "red/scoring.hpp"

namespace red::agents {

struct UserProfile {
    std::string session_id;
    std::string profile_text;
};

struct EventTriplet {
    std::string subject;
    std::string predicate;
    std::string object;      // may be empty for intransitive events
    std::string source_ref;  // "chunk:<id>" or "kb:<id>"
};

struct AspectAssessment {
    scoring::Aspect aspect = scoring::Aspect::interest;
    int score = 0;
    std::string rationale;
    std::vector<int> evidence_refs;
    bool insufficient_evidence = false;
    bool fail_safe = false;  // score forced after malformed output
};

struct JudgeDecision {
    bool keep_retrieving = false;
    bool fail_safe = false;
};

struct FinalAssessment {
    std::map<scoring::Aspect, int> scores;
    std::string justification;
    bool fallback = false;  // preliminary scores kept after malformed output
};

struct AgentOptions {
    int max_retries = 2;              // re-asks after malformed output
    size_t profile_copy_limit = 300;  // max verbatim chars echoed from one turn
};

struct AgentRuntime {
    LlmProvider& llm;
    const TemplateSet& templates;
    AgentOptions options{};
    RunRecord* record = nullptr;
};

namespace detail {

// Runs the ask-parse loop: up to 1 + max_retries attempts. Returns the first
// successfully parsed value, or nullopt once attempts are exhausted. Every
// exchange is appended to the run record exactly once, carrying the parse
// error when one occurred; provider failures are recorded and rethrown.
template <typename T, typename ParseFn>
std::optional<T> ask_with_retries(AgentRuntime& rt, PromptRole role, const std::string& stage,
                                  const std::string& prompt, ParseFn&& parse) {
    if (corpus::count_tokens(prompt) > rt.llm.context_window())
        throw ContextWindowExceeded("prompt exceeds context window of " +
                                    std::to_string(rt.llm.context_window()) + " tokens");
    const int attempts = 1 + rt.options.max_retries;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        RunRecord::Exchange e;
        e.stage = stage;
        e.attempt = attempt;
        e.role = prompt_role_name(role);
        e.prompt = prompt;
        auto t0 = std::chrono::steady_clock::now();
        auto elapsed = [&t0] {
            return std::chrono::duration_cast<std::chrono::microseconds>(
                       std::chrono::steady_clock::now() - t0)
                .count();
        };
        std::string response;
        try {
            response = rt.llm.complete(LlmRequest{role, prompt});
        } catch (const Error& err) {
            e.error = std::string("provider: ") + err.what();
            e.elapsed_us = elapsed();
            if (rt.record) rt.record->append(std::move(e));
            throw;
        }
        e.elapsed_us = elapsed();
        e.response = response;
        try {
            T value = parse(response);
            if (rt.record) rt.record->append(std::move(e));
            return value;
        } catch (const MalformedOutput& err) {
            e.error = std::string("malformed: ") + err.what();
            if (rt.record) rt.record->append(std::move(e));
        }
    }
    return std::nullopt;
}

// Pulls the outermost JSON value out of a response, tolerating markdown
// fences and surrounding prose.
inline nlohmann::json parse_json_payload(const std::string& response) {
    size_t start = response.find_first_of("[{");
    if (start == std::string::npos) throw MalformedOutput("no JSON payload in response");
    char open = response[start];
    char close = open == '[' ? ']' : '}';
    int depth = 0;
    bool in_string = false;
    for (size_t i = start; i < response.size(); ++i) {
        char c = response[i];
        if (in_string) {
            if (c == '\\')
                ++i;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == open)
            ++depth;
        else if (c == close) {
            --depth;
            if (depth == 0) {
                auto j = nlohmann::json::parse(response.substr(start, i - start + 1), nullptr,
                                               false);
                if (j.is_discarded()) throw MalformedOutput("unparseable JSON payload");
                return j;
            }
        }
    }
    throw MalformedOutput("unbalanced JSON payload");
}

// True when the profile echoes more than `limit` consecutive characters from
// any single turn.
inline bool violates_copy_limit(const std::string& profile, const corpus::Session& session,
                                size_t limit) {
    if (limit == 0) return false;
    for (const auto& turn : session.turns) {
        if (turn.text.size() <= limit) continue;
        for (size_t i = 0; i + limit < turn.text.size(); ++i) {
            if (profile.find(turn.text.substr(i, limit + 1)) != std::string::npos) return true;
        }
    }
    return false;
}

}  // namespace detail

inline UserProfile infer_profile(AgentRuntime& rt, const corpus::Session& session) {
    if (session.turns.empty()) throw EmptySession("cannot profile an empty session");
    std::string prompt = rt.templates.get(PromptRole::profile)
                             .render({{"dialogue", corpus::render_dialogue(session)}});
    auto parsed = detail::ask_with_retries<std::string>(
        rt, PromptRole::profile, "profile", prompt, [&](const std::string& response) {
            std::string text = util::trim(response);
            if (text.empty()) throw MalformedOutput("empty profile");
            if (detail::violates_copy_limit(text, session, rt.options.profile_copy_limit))
                throw MalformedOutput("profile copies transcript verbatim beyond the limit");
            return text;
        });
    if (!parsed) throw MalformedOutput("profile malformed after retries");
    return UserProfile{session.session_id, *parsed};
}

inline retrieval::PersonalQuery personalize_query(AgentRuntime& rt,
                                                  const retrieval::BasicQuery& basic,
                                                  const UserProfile& profile) {
    std::string prompt = rt.templates.get(PromptRole::personalize)
                             .render({{"aspect", scoring::aspect_name(basic.aspect)},
                                      {"profile", profile.profile_text},
                                      {"basic_query", basic.text}});
    auto parsed = detail::ask_with_retries<std::string>(
        rt, PromptRole::personalize, "personalize", prompt, [](const std::string& response) {
            std::string text = util::trim(response);
            if (text.empty()) throw MalformedOutput("empty personalized query");
            return text;
        });
    if (!parsed) return retrieval::PersonalQuery{basic.aspect, basic.text, true};
    return retrieval::PersonalQuery{basic.aspect, *parsed, false};
}

// true = keep retrieving, false = stop. Malformed output after retries stops
// retrieval (fail-safe) and is flagged.
inline JudgeDecision judge_continue(AgentRuntime& rt, const retrieval::PersonalQuery& query,
                                    const retrieval::EvidenceSet& evidence) {
    if (evidence.items.empty())
        throw Error("judge_continue requires non-empty evidence");
    std::string prompt =
        rt.templates.get(PromptRole::judge)
            .render({{"query", query.text}, {"evidence", retrieval::render_evidence(evidence)}});
    auto parsed = detail::ask_with_retries<bool>(
        rt, PromptRole::judge, "judge", prompt, [](const std::string& response) {
            std::string word = util::to_lower(util::trim(response));
            while (!word.empty() && (word.back() == '.' || word.back() == '!')) word.pop_back();
            if (word == "yes") return true;
            if (word == "no") return false;
            throw MalformedOutput("expected YES or NO, got: " + response.substr(0, 40));
        });
    if (!parsed) return JudgeDecision{false, true};
    return JudgeDecision{*parsed, false};
}

inline std::vector<EventTriplet> extract_events(AgentRuntime& rt, const std::string& text) {
    if (util::trim(text).empty()) return {};
    std::string prompt = rt.templates.get(PromptRole::event_extract).render({{"text", text}});
    auto parsed = detail::ask_with_retries<std::vector<EventTriplet>>(
        rt, PromptRole::event_extract, "event_extract", prompt, [](const std::string& response) {
            nlohmann::json j = detail::parse_json_payload(response);
            if (!j.is_array()) throw MalformedOutput("events payload is not an array");
            std::vector<EventTriplet> events;
            for (const auto& item : j) {
                if (!item.is_object()) throw MalformedOutput("event is not an object");
                EventTriplet t;
                t.subject = util::trim(item.value("subject", ""));
                t.predicate = util::trim(item.value("predicate", ""));
                t.object = util::trim(item.value("object", ""));
                if (t.subject.empty() || t.predicate.empty())
                    throw MalformedOutput("event subject/predicate must be non-empty");
                events.push_back(std::move(t));
            }
            return events;
        });
    // Extraction failures degrade to "no events"; the warning stays on the
    // run record.
    if (!parsed) return {};
    return *parsed;
}

inline AspectAssessment preliminary_assess(AgentRuntime& rt, const retrieval::PersonalQuery& query,
                                           const retrieval::EvidenceSet& evidence) {
    AspectAssessment out;
    out.aspect = evidence.aspect;
    if (evidence.items.empty()) {
        out.score = 0;
        out.rationale = "insufficient evidence";
        out.insufficient_evidence = true;
        return out;
    }
    std::string prompt =
        rt.templates.get(PromptRole::preliminary)
            .render({{"aspect", scoring::aspect_name(evidence.aspect)},
                     {"query", query.text},
                     {"evidence", retrieval::render_evidence(evidence)}});
    auto parsed = detail::ask_with_retries<AspectAssessment>(
        rt, PromptRole::preliminary, "preliminary", prompt, [&](const std::string& response) {
            nlohmann::json j = detail::parse_json_payload(response);
            if (!j.is_object() || !j.contains("score") || !j["score"].is_number_integer())
                throw MalformedOutput("expected {\"score\": <int>, ...}");
            int score = j["score"].get<int>();
            if (score < 0 || score > 3)
                throw MalformedOutput("score out of range [0,3]: " + std::to_string(score));
            AspectAssessment a;
            a.aspect = evidence.aspect;
            a.score = score;
            a.rationale = j.value("rationale", "");
            if (j.contains("evidence")) {
                if (!j["evidence"].is_array()) throw MalformedOutput("evidence is not an array");
                for (const auto& ref : j["evidence"]) {
                    int chunk_id = ref.get<int>();
                    bool known = false;
                    for (const auto& item : evidence.items)
                        if (item.chunk_id == chunk_id) known = true;
                    if (!known)
                        throw MalformedOutput("evidence ref outside the retrieved set: " +
                                              std::to_string(chunk_id));
                    a.evidence_refs.push_back(chunk_id);
                }
            } else {
                for (const auto& item : evidence.items) a.evidence_refs.push_back(item.chunk_id);
            }
            return a;
        });
    if (!parsed) {
        out.score = 0;
        out.rationale = "assessment unavailable";
        out.fail_safe = true;
        for (const auto& item : evidence.items) out.evidence_refs.push_back(item.chunk_id);
        return out;
    }
    return *parsed;
}

inline std::string render_preliminary_block(const std::vector<AspectAssessment>& assessments) {
    std::string out;
    for (const auto& a : assessments) {
        out += std::string("- ") + scoring::aspect_name(a.aspect) + ": " +
               std::to_string(a.score);
        if (!a.rationale.empty()) out += " (" + a.rationale + ")";
        out.push_back('\n');
    }
    if (!out.empty()) out.pop_back();
    return out;
}

// The final eight-score assessment over knowledge-enhanced evidence. The
// label itself is never requested from the provider; scoring derives it.
inline FinalAssessment final_assess(AgentRuntime& rt, const std::string& enhanced_evidence_text,
                                    const std::vector<AspectAssessment>& preliminary) {
    if (preliminary.size() != scoring::kAspects.size())
        throw Error("final_assess requires exactly 8 preliminary assessments");
    std::map<scoring::Aspect, int> prelim_scores;
    for (const auto& a : preliminary) {
        if (!prelim_scores.emplace(a.aspect, a.score).second)
            throw DuplicateAspect(std::string("duplicate preliminary aspect: ") +
                                  scoring::aspect_name(a.aspect));
    }

    std::string prompt = rt.templates.get(PromptRole::final_assess)
                             .render({{"preliminary", render_preliminary_block(preliminary)},
                                      {"evidence", enhanced_evidence_text}});
    auto parsed = detail::ask_with_retries<FinalAssessment>(
        rt, PromptRole::final_assess, "final", prompt, [](const std::string& response) {
            nlohmann::json j = detail::parse_json_payload(response);
            if (!j.is_object() || !j.contains("scores") || !j["scores"].is_object())
                throw MalformedOutput("expected {\"scores\": {...}, ...}");
            FinalAssessment f;
            const auto& scores = j["scores"];
            for (scoring::Aspect a : scoring::kAspects) {
                auto it = scores.find(scoring::aspect_name(a));
                if (it == scores.end() || !it->is_number_integer())
                    throw MalformedOutput(std::string("missing score for aspect ") +
                                          scoring::aspect_name(a));
                int score = it->get<int>();
                if (score < 0 || score > 3)
                    throw MalformedOutput("score out of range [0,3]: " + std::to_string(score));
                f.scores[a] = score;
            }
            if (scores.size() != scoring::kAspects.size())
                throw MalformedOutput("unexpected aspect keys in scores");
            f.justification = j.value("justification", "");
            return f;
        });
    if (!parsed) {
        FinalAssessment f;
        f.scores = prelim_scores;
        f.fallback = true;
        return f;
    }
    return *parsed;
}

}  // namespace red::agents

#endif  // RED_AGENTS_HPP
