#ifndef RED_PIPELINE_HPP
#define RED_PIPELINE_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "red/agents.hpp"
#include "red/config.hpp"
#include "red/corpus.hpp"
#include "red/embed.hpp"
#include "red/errors.hpp"
#include "red/evidence.hpp"
#include "red/report.hpp"
#include "red/retrieval.hpp"
#include "red/scoring.hpp"
#include "red/socialint.hpp"

namespace red::retrieval {

struct PipelineDeps {
    embed::EmbeddingProvider& embedder;
    agents::LlmProvider& llm;
    socialint::EventEncoder& encoder;
    const socialint::KBIndex& kb_index;
    const agents::TemplateSet& templates;
    embed::EmbeddingCache* cache = nullptr;
    agents::RunRecord* record = nullptr;
};

namespace detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e.what());
    }
}

// Plain-text knowledge retrieval over entry keys, reusing the evidence
// chunks' embeddings as queries. The alternative to event-centric mode.
inline std::map<scoring::Aspect, std::vector<socialint::KnowledgeAttachment>>
text_mode_attachments(const std::vector<EvidenceSet>& evidence, const SessionChunkIndex& index,
                      const socialint::KBIndex& kb_index, embed::EmbeddingProvider& embedder,
                      embed::EmbeddingCache* cache, size_t m, embed::SimilarityMetric metric) {
    std::vector<std::string> keys;
    keys.reserve(kb_index.entries.size());
    for (const auto& entry : kb_index.entries) keys.push_back(entry.key);
    auto key_vectors = embed::embed_texts(embedder, keys, cache);

    std::map<int, size_t> vector_by_chunk;
    for (size_t i = 0; i < index.retrievable_ids.size(); ++i)
        vector_by_chunk[index.retrievable_ids[i]] = i;

    std::map<scoring::Aspect, std::vector<socialint::KnowledgeAttachment>> out;
    for (const auto& set : evidence) {
        std::map<int, socialint::KnowledgeAttachment> best;
        for (const auto& item : set.items) {
            auto it = vector_by_chunk.find(item.chunk_id);
            if (it == vector_by_chunk.end()) continue;
            auto ranked = embed::top_k(index.vectors[it->second], key_vectors, m, metric);
            for (const auto& [key_pos, score] : ranked) {
                const auto& entry = kb_index.entries[static_cast<size_t>(key_pos)];
                auto found = best.find(entry.entry_id);
                if (found == best.end() || embed::better(metric, score, found->second.score))
                    best[entry.entry_id] =
                        socialint::KnowledgeAttachment{entry.entry_id, entry.value, score};
            }
        }
        std::vector<socialint::KnowledgeAttachment> merged;
        for (auto& [id, att] : best) merged.push_back(std::move(att));
        std::sort(merged.begin(), merged.end(),
                  [&](const socialint::KnowledgeAttachment& a,
                      const socialint::KnowledgeAttachment& b) {
                      if (a.score != b.score) return embed::better(metric, a.score, b.score);
                      return a.entry_id < b.entry_id;
                  });
        out[set.aspect] = std::move(merged);
    }
    return out;
}

}  // namespace detail

// The full inference pass for one session: profile, query personalization,
// per-aspect adaptive retrieval, preliminary assessments, knowledge
// enhancement over the pooled evidence, final assessment, scoring.
inline cli::DetectionReport run_red(const corpus::Session& session,
                                    const std::vector<BasicQuery>& queries,
                                    const PipelineDeps& deps, const cli::RunConfig& config,
                                    const std::string& run_id,
                                    const std::string& config_fingerprint) {
    if (queries.size() != scoring::kAspects.size())
        throw StageError("setup", "query set must cover all 8 aspects");
    {
        std::map<scoring::Aspect, int> seen;
        for (const auto& q : queries)
            if (++seen[q.aspect] > 1)
                throw StageError("setup", std::string("duplicate basic query for aspect ") +
                                              scoring::aspect_name(q.aspect));
    }

    agents::AgentRuntime rt{deps.llm, deps.templates,
                            agents::AgentOptions{config.max_retries, config.profile_copy_limit},
                            deps.record};

    auto index = detail::stage("chunk", [&] {
        auto chunks = corpus::chunk_session(session, config.chunk_budget);
        return index_session_chunks(session, std::move(chunks), deps.embedder, deps.cache,
                                    config.include_interviewer);
    });

    auto profile =
        detail::stage("profile", [&] { return agents::infer_profile(rt, session); });

    std::vector<PersonalQuery> personal_queries = detail::stage("personalize", [&] {
        std::vector<PersonalQuery> out;
        for (scoring::Aspect aspect : scoring::kAspects) {
            for (const auto& q : queries)
                if (q.aspect == aspect)
                    out.push_back(agents::personalize_query(rt, q, profile));
        }
        return out;
    });

    RetrievalOptions retrieval_options{config.retrieval_budget, config.metric, config.adaptive};
    std::vector<EvidenceSet> evidence = detail::stage("retrieve", [&] {
        std::vector<EvidenceSet> out;
        for (const auto& query : personal_queries) {
            embed::Vector query_vector =
                embed::embed_texts(deps.embedder, {query.text}, deps.cache)[0];
            out.push_back(
                retrieve_evidence_for_aspect(rt, query, query_vector, index, retrieval_options));
        }
        return out;
    });

    std::vector<agents::AspectAssessment> preliminary = detail::stage("preliminary", [&] {
        std::vector<agents::AspectAssessment> out;
        for (size_t i = 0; i < evidence.size(); ++i)
            out.push_back(agents::preliminary_assess(rt, personal_queries[i], evidence[i]));
        return out;
    });

    socialint::EnhancedEvidence enhanced;
    std::map<scoring::Aspect, std::vector<socialint::KnowledgeAttachment>> text_attachments;
    detail::stage("enhance", [&] {
        if (config.knowledge_mode == "event") {
            socialint::EventExtractor extractor = [&](const std::string& text) {
                return agents::extract_events(rt, text);
            };
            enhanced = socialint::enhance_evidence(evidence, deps.kb_index, extractor,
                                                   deps.encoder, config.knowledge_top_m,
                                                   config.attach_mode);
        } else {
            enhanced.evidence = evidence;
            enhanced.mode = socialint::AttachMode::per_aspect;
            enhanced.per_aspect = detail::text_mode_attachments(
                evidence, index, deps.kb_index, deps.embedder, deps.cache,
                config.knowledge_top_m, config.metric);
        }
        return 0;
    });

    agents::FinalAssessment final = detail::stage("final", [&] {
        return agents::final_assess(rt, socialint::render_enhanced_evidence(enhanced),
                                    preliminary);
    });

    scoring::Prediction prediction = detail::stage("scoring", [&] {
        return scoring::make_prediction(session.session_id, final.scores, config.threshold);
    });

    cli::DetectionReport report;
    report.run_id = run_id;
    report.config_fingerprint = config_fingerprint;
    report.session_id = session.session_id;
    report.user_profile = profile.profile_text;
    for (size_t i = 0; i < scoring::kAspects.size(); ++i) {
        cli::AspectReport a;
        a.aspect = scoring::kAspects[i];
        a.personal_query = personal_queries[i];
        a.evidence = evidence[i].items;
        a.insufficient_evidence = evidence[i].insufficient_evidence;
        a.preliminary = preliminary[i];
        if (enhanced.mode == socialint::AttachMode::per_aspect) {
            auto it = enhanced.per_aspect.find(a.aspect);
            if (it != enhanced.per_aspect.end()) a.knowledge = it->second;
        }
        a.final_score = prediction.aspect_scores.at(a.aspect);
        report.aspects.push_back(std::move(a));
    }
    if (enhanced.mode == socialint::AttachMode::pooled)
        report.pooled_knowledge = enhanced.pooled;
    report.total = prediction.total;
    report.threshold_used = prediction.threshold_used;
    report.label = scoring::label_name(prediction.label);
    report.final_fallback = final.fallback;
    report.justification = final.justification;
    if (config.redact) report = report.redacted_copy();
    return report;
}

}  // namespace red::retrieval

#endif  // RED_PIPELINE_HPP
