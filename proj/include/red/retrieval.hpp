#ifndef RED_RETRIEVAL_HPP
#define RED_RETRIEVAL_HPP

#include <string>
#include <vector>

#include "red/agents.hpp"
#include "red/corpus.hpp"
#include "red/embed.hpp"
#include "red/errors.hpp"
#include "red/evidence.hpp"

namespace red::retrieval {

// Session chunks plus their retrieval embeddings. Chunks whose embed text is
// empty (possible when interviewer turns are excluded) are left out of the
// retrievable set but keep their place in `chunks`.
struct SessionChunkIndex {
    std::vector<corpus::Chunk> chunks;
    std::vector<int> retrievable_ids;       // chunk ids present in `vectors`
    std::vector<embed::Vector> vectors;     // parallel to retrievable_ids
};

inline SessionChunkIndex index_session_chunks(const corpus::Session& session,
                                              std::vector<corpus::Chunk> chunks,
                                              embed::EmbeddingProvider& provider,
                                              embed::EmbeddingCache* cache = nullptr,
                                              bool include_interviewer = true) {
    SessionChunkIndex index;
    index.chunks = std::move(chunks);
    std::vector<std::string> texts;
    for (const auto& chunk : index.chunks) {
        std::string text = corpus::chunk_embed_text(session, chunk, include_interviewer);
        if (text.empty()) continue;
        index.retrievable_ids.push_back(chunk.chunk_id);
        texts.push_back(std::move(text));
    }
    if (!texts.empty()) index.vectors = embed::embed_texts(provider, texts, cache);
    return index;
}

struct RetrievalOptions {
    size_t budget = 10;  // hard cap on the adaptive loop
    embed::SimilarityMetric metric = embed::SimilarityMetric::squared_l2_distance;
    bool adaptive = true;  // false = fixed-k retrieval, no judge calls
};

struct RetrievalStep {
    std::vector<int> remaining_before;  // retrievable chunk ids before the pick
    int picked_chunk = -1;
    double score = 0.0;
    bool judge_called = false;
    bool judged_continue = false;
};

struct RetrievalTrace {
    std::vector<RetrievalStep> steps;
};

// One pass of the per-aspect loop: embed the query once, then repeatedly take
// the top-1 of the remaining chunks, append it to the evidence, remove it
// from the pool, and ask the judge whether to continue. Stops when the judge
// says stop, the pool is exhausted, or the budget is reached.
inline EvidenceSet retrieve_evidence_for_aspect(agents::AgentRuntime& rt,
                                                const PersonalQuery& query,
                                                const embed::Vector& query_vector,
                                                const SessionChunkIndex& index,
                                                const RetrievalOptions& options = {},
                                                RetrievalTrace* trace = nullptr) {
    if (options.budget < 1) throw Error("retrieval budget must be >= 1");
    EvidenceSet evidence;
    evidence.aspect = query.aspect;
    if (index.retrievable_ids.empty()) {
        evidence.insufficient_evidence = true;
        return evidence;
    }

    std::vector<size_t> remaining(index.retrievable_ids.size());
    for (size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

    while (evidence.items.size() < options.budget && !remaining.empty()) {
        size_t best_pos = 0;
        double best_score =
            embed::similarity(query_vector, index.vectors[remaining[0]], options.metric);
        for (size_t pos = 1; pos < remaining.size(); ++pos) {
            double score =
                embed::similarity(query_vector, index.vectors[remaining[pos]], options.metric);
            // Ties break toward the lower chunk id; `remaining` stays sorted.
            if (embed::better(options.metric, score, best_score)) {
                best_score = score;
                best_pos = pos;
            }
        }

        RetrievalStep step;
        if (trace)
            for (size_t pos : remaining)
                step.remaining_before.push_back(index.retrievable_ids[pos]);

        size_t picked = remaining[best_pos];
        const corpus::Chunk& chunk =
            index.chunks[static_cast<size_t>(index.retrievable_ids[picked])];
        EvidenceItem item;
        item.chunk_id = chunk.chunk_id;
        item.aspect = query.aspect;
        item.rank = static_cast<int>(evidence.items.size());
        item.score = best_score;
        item.text = chunk.text;
        item.turn_begin = chunk.turn_begin;
        item.turn_end = chunk.turn_end;
        evidence.items.push_back(std::move(item));
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));

        step.picked_chunk = chunk.chunk_id;
        step.score = best_score;

        bool keep_going = true;
        if (options.adaptive && evidence.items.size() < options.budget && !remaining.empty()) {
            auto decision = agents::judge_continue(rt, query, evidence);
            keep_going = decision.keep_retrieving;
            step.judge_called = true;
            step.judged_continue = keep_going;
        }
        if (trace) trace->steps.push_back(std::move(step));
        if (options.adaptive && !keep_going) break;
    }
    return evidence;
}

}  // namespace red::retrieval

#endif  // RED_RETRIEVAL_HPP
