#ifndef RED_SOCIALINT_HPP
#define RED_SOCIALINT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/agents.hpp"
#include "red/corpus.hpp"
#include "red/errors.hpp"
#include "red/evidence.hpp"
#include "red/gaussian.hpp"
#include "red/tokenize.hpp"
#include "red/util.hpp"

namespace red::socialint {

class EventEncoder {
public:
    virtual ~EventEncoder() = default;
    virtual std::string encoder_id() const = 0;
    virtual size_t dim() const = 0;
    virtual GaussianEmbedding encode(const agents::EventTriplet& triplet) = 0;
};

// Deterministic baseline: role-salted feature hashing of the triplet tokens
// into mu (L2-normalized), with a fixed linear sigma ramp. A stand-in for a
// trained event encoder, kept only so the KL retrieval machinery is testable
// offline.
class BaselineHashEncoder final : public EventEncoder {
public:
    explicit BaselineHashEncoder(size_t dim = 500) : dim_(dim) {
        if (dim_ < 1) throw Error("encoder dim must be >= 1");
    }

    std::string encoder_id() const override {
        return "baseline-hash-v1-d" + std::to_string(dim_);
    }

    size_t dim() const override { return dim_; }

    GaussianEmbedding encode(const agents::EventTriplet& triplet) override {
        GaussianEmbedding g;
        g.mu.assign(dim_, 0.0);
        g.sigma.resize(dim_);
        accumulate(g.mu, "s:", triplet.subject);
        accumulate(g.mu, "p:", triplet.predicate);
        accumulate(g.mu, "o:", triplet.object);
        double norm = 0.0;
        for (double x : g.mu) norm += x * x;
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double& x : g.mu) x /= norm;
        }
        for (size_t d = 0; d < dim_; ++d)
            g.sigma[d] = dim_ > 1 ? 0.5 + static_cast<double>(d) / (dim_ - 1) : 1.0;
        clamp_sigma(g);
        return g;
    }

private:
    void accumulate(std::vector<double>& mu, const char* salt, const std::string& part) const {
        for (const auto& token : corpus::tokenize(util::to_lower(part))) {
            std::uint64_t h = util::fnv1a64(std::string(salt) + token);
            mu[static_cast<size_t>(h % dim_)] += ((h >> 32) & 1u) ? 1.0 : -1.0;
        }
    }

    size_t dim_;
};

// Serves externally precomputed (mu, sigma) pairs keyed by exact triplet.
// Import format: one JSON record per line with
// {subject, predicate, object, mu: [float; dim], sigma: [float; dim]}.
class TableEventEncoder final : public EventEncoder {
public:
    static TableEventEncoder from_jsonl(std::string_view raw, const std::string& table_id) {
        TableEventEncoder enc;
        enc.id_ = "table-" + table_id;
        int line_no = 0;
        for (const auto& line : util::split_lines(raw)) {
            ++line_no;
            if (util::trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw MalformedRecord("embedding record is not a JSON object", line_no);
            GaussianEmbedding g;
            g.mu = j.at("mu").get<std::vector<double>>();
            g.sigma = j.at("sigma").get<std::vector<double>>();
            if (g.mu.size() != g.sigma.size())
                throw MalformedRecord("mu/sigma dims differ", line_no);
            if (enc.dim_ == 0) enc.dim_ = g.mu.size();
            if (g.mu.size() != enc.dim_)
                throw MalformedRecord("inconsistent embedding dim", line_no);
            clamp_sigma(g);
            enc.table_[key(j.value("subject", ""), j.value("predicate", ""),
                           j.value("object", ""))] = std::move(g);
        }
        if (enc.table_.empty()) throw Error("embedding table is empty");
        return enc;
    }

    static TableEventEncoder from_file(const std::filesystem::path& path) {
        return from_jsonl(util::read_file(path), path.filename().string());
    }

    std::string encoder_id() const override { return id_; }
    size_t dim() const override { return dim_; }

    GaussianEmbedding encode(const agents::EventTriplet& t) override {
        auto it = table_.find(key(t.subject, t.predicate, t.object));
        if (it == table_.end())
            throw EncoderUnavailable("no precomputed embedding for event (" + t.subject + ", " +
                                     t.predicate + ", " + t.object + ")");
        return it->second;
    }

private:
    static std::string key(const std::string& s, const std::string& p, const std::string& o) {
        return s + "\x1f" + p + "\x1f" + o;
    }

    std::string id_;
    size_t dim_ = 0;
    std::map<std::string, GaussianEmbedding> table_;
};

using EventExtractor = std::function<std::vector<agents::EventTriplet>(const std::string&)>;

struct KBIndexEntry {
    int entry_id = 0;
    std::string key;
    std::string value;
    std::vector<agents::EventTriplet> events;
    std::vector<GaussianEmbedding> embeddings;
};

struct KBIndex {
    std::string encoder_id;
    size_t dim = 0;
    std::vector<KBIndexEntry> entries;

    size_t event_count() const {
        size_t n = 0;
        for (const auto& e : entries) n += e.events.size();
        return n;
    }

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["schema"] = "red.kb_index.v1";
        j["encoder_id"] = encoder_id;
        j["dim"] = dim;
        j["entries"] = nlohmann::ordered_json::array();
        for (const auto& e : entries) {
            nlohmann::ordered_json je;
            je["entry_id"] = e.entry_id;
            je["key"] = e.key;
            je["value"] = e.value;
            je["events"] = nlohmann::ordered_json::array();
            for (size_t i = 0; i < e.events.size(); ++i) {
                nlohmann::ordered_json jt;
                jt["subject"] = e.events[i].subject;
                jt["predicate"] = e.events[i].predicate;
                jt["object"] = e.events[i].object;
                jt["mu"] = e.embeddings[i].mu;
                jt["sigma"] = e.embeddings[i].sigma;
                je["events"].push_back(std::move(jt));
            }
            j["entries"].push_back(std::move(je));
        }
        return j.dump();
    }

    static KBIndex from_json(std::string_view raw) {
        nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
        if (j.is_discarded() || !j.is_object() || j.value("schema", "") != "red.kb_index.v1")
            throw IoError("not a knowledge index artifact");
        KBIndex index;
        index.encoder_id = j.at("encoder_id").get<std::string>();
        index.dim = j.at("dim").get<size_t>();
        for (const auto& je : j.at("entries")) {
            KBIndexEntry e;
            e.entry_id = je.at("entry_id").get<int>();
            e.key = je.value("key", "");
            e.value = je.at("value").get<std::string>();
            for (const auto& jt : je.at("events")) {
                agents::EventTriplet t;
                t.subject = jt.value("subject", "");
                t.predicate = jt.value("predicate", "");
                t.object = jt.value("object", "");
                t.source_ref = "kb:" + std::to_string(e.entry_id);
                GaussianEmbedding g;
                g.mu = jt.at("mu").get<std::vector<double>>();
                g.sigma = jt.at("sigma").get<std::vector<double>>();
                clamp_sigma(g);
                e.events.push_back(std::move(t));
                e.embeddings.push_back(std::move(g));
            }
            index.entries.push_back(std::move(e));
        }
        return index;
    }

    void save(const std::filesystem::path& path) const { util::atomic_write_file(path, to_json()); }

    static KBIndex load(const std::filesystem::path& path) {
        return from_json(util::read_file(path));
    }
};

// Extracts events from every entry key and encodes them. Entries whose key
// yields no events fall back to a whole-key pseudo-triplet
// (subject=situation, predicate="", object=clue).
inline KBIndex build_kb_index(const std::vector<corpus::KnowledgeEntry>& kb,
                              const EventExtractor& extractor, EventEncoder& encoder) {
    if (kb.empty()) throw EmptyKnowledgeBase("knowledge base has no entries");
    KBIndex index;
    index.encoder_id = encoder.encoder_id();
    index.dim = encoder.dim();
    for (const auto& entry : kb) {
        KBIndexEntry e;
        e.entry_id = entry.entry_id;
        e.key = entry.key;
        e.value = entry.value;
        auto events = extractor(entry.key);
        if (events.empty()) {
            agents::EventTriplet pseudo;
            pseudo.subject = entry.situation;
            pseudo.predicate = "";
            pseudo.object = entry.clue;
            events.push_back(std::move(pseudo));
        }
        for (auto& t : events) {
            t.source_ref = "kb:" + std::to_string(entry.entry_id);
            e.embeddings.push_back(encoder.encode(t));
            e.events.push_back(std::move(t));
        }
        index.entries.push_back(std::move(e));
    }
    return index;
}

struct KnowledgeAttachment {
    int entry_id = 0;
    std::string value;
    double score = 0.0;  // sym_kl; lower is more similar
};

inline size_t find_entry(const KBIndex& index, int entry_id) {
    for (size_t i = 0; i < index.entries.size(); ++i)
        if (index.entries[i].entry_id == entry_id) return i;
    throw Error("entry not in index: " + std::to_string(entry_id));
}

// For each query event, KB entries are ranked by the minimum sym_kl over the
// entry's event embeddings and the best m distinct entries are kept; results
// from all events are merged, keeping each entry's best score. Ties break
// toward the lower entry_id.
inline std::vector<KnowledgeAttachment> retrieve_knowledge(
    const std::vector<agents::EventTriplet>& events, const KBIndex& index, EventEncoder& encoder,
    size_t m = 2) {
    if (index.entries.empty()) throw EmptyKnowledgeBase("knowledge index has no entries");
    if (m < 1) throw Error("retrieve_knowledge requires m >= 1");
    if (encoder.encoder_id() != index.encoder_id)
        throw EncoderUnavailable("index built with encoder '" + index.encoder_id +
                                 "' but queries use '" + encoder.encoder_id() + "'");
    std::map<int, KnowledgeAttachment> best;
    for (const auto& event : events) {
        GaussianEmbedding g = encoder.encode(event);
        std::vector<std::pair<double, int>> ranked;  // (score, entry_id)
        ranked.reserve(index.entries.size());
        for (const auto& entry : index.entries) {
            double entry_score = std::numeric_limits<double>::infinity();
            for (const auto& emb : entry.embeddings)
                entry_score = std::min(entry_score, sym_kl(g, emb));
            ranked.emplace_back(entry_score, entry.entry_id);
        }
        std::sort(ranked.begin(), ranked.end());
        size_t take = std::min(m, ranked.size());
        for (size_t i = 0; i < take; ++i) {
            auto [score, entry_id] = ranked[i];
            auto it = best.find(entry_id);
            if (it == best.end() || score < it->second.score) {
                const auto& entry = index.entries[find_entry(index, entry_id)];
                best[entry_id] = KnowledgeAttachment{entry_id, entry.value, score};
            }
        }
    }
    std::vector<KnowledgeAttachment> out;
    out.reserve(best.size());
    for (auto& [id, att] : best) out.push_back(std::move(att));
    std::sort(out.begin(), out.end(), [](const KnowledgeAttachment& a,
                                         const KnowledgeAttachment& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.entry_id < b.entry_id;
    });
    return out;
}

enum class AttachMode { per_aspect, pooled };

struct EnhancedEvidence {
    std::vector<retrieval::EvidenceSet> evidence;  // one set per aspect
    std::map<scoring::Aspect, std::vector<KnowledgeAttachment>> per_aspect;
    std::vector<KnowledgeAttachment> pooled;
    AttachMode mode = AttachMode::per_aspect;
};

// Event extraction runs once per distinct chunk over the pooled evidence
// union; attachments are then computed per aspect (default) or once over the
// pooled events.
inline EnhancedEvidence enhance_evidence(const std::vector<retrieval::EvidenceSet>& evidence,
                                         const KBIndex& index, const EventExtractor& extractor,
                                         EventEncoder& encoder, size_t m = 2,
                                         AttachMode mode = AttachMode::per_aspect) {
    EnhancedEvidence out;
    out.evidence = evidence;
    out.mode = mode;

    std::map<int, std::vector<agents::EventTriplet>> events_by_chunk;
    for (const auto& set : evidence) {
        for (const auto& item : set.items) {
            if (events_by_chunk.count(item.chunk_id)) continue;
            auto events = extractor(item.text);
            for (auto& t : events) t.source_ref = "chunk:" + std::to_string(item.chunk_id);
            events_by_chunk[item.chunk_id] = std::move(events);
        }
    }

    if (mode == AttachMode::per_aspect) {
        for (const auto& set : evidence) {
            std::vector<agents::EventTriplet> events;
            for (const auto& item : set.items) {
                const auto& chunk_events = events_by_chunk[item.chunk_id];
                events.insert(events.end(), chunk_events.begin(), chunk_events.end());
            }
            out.per_aspect[set.aspect] =
                events.empty() ? std::vector<KnowledgeAttachment>{}
                               : retrieve_knowledge(events, index, encoder, m);
        }
    } else {
        std::vector<agents::EventTriplet> events;
        for (const auto& [chunk_id, chunk_events] : events_by_chunk)
            events.insert(events.end(), chunk_events.begin(), chunk_events.end());
        out.pooled = events.empty() ? std::vector<KnowledgeAttachment>{}
                                    : retrieve_knowledge(events, index, encoder, m);
    }
    return out;
}

// Final-prompt rendering: evidence per aspect in retrieval-rank order, with
// attached knowledge values underneath.
inline std::string render_enhanced_evidence(const EnhancedEvidence& enhanced) {
    std::string out;
    for (const auto& set : enhanced.evidence) {
        out += std::string("# ") + scoring::aspect_name(set.aspect) + "\n";
        if (set.items.empty()) {
            out += "(no evidence)\n";
        } else {
            for (const auto& item : set.items)
                out += "[chunk " + std::to_string(item.chunk_id) + "]\n" + item.text + "\n";
        }
        if (enhanced.mode == AttachMode::per_aspect) {
            auto it = enhanced.per_aspect.find(set.aspect);
            if (it != enhanced.per_aspect.end())
                for (const auto& att : it->second) out += "knowledge: " + att.value + "\n";
        }
        out.push_back('\n');
    }
    if (enhanced.mode == AttachMode::pooled && !enhanced.pooled.empty()) {
        out += "# background knowledge\n";
        for (const auto& att : enhanced.pooled) out += "knowledge: " + att.value + "\n";
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

}  // namespace red::socialint

#endif  // RED_SOCIALINT_HPP
