#ifndef RED_EMBED_HPP
#define RED_EMBED_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/errors.hpp"
#include "red/tokenize.hpp"
#include "red/util.hpp"

namespace red::embed {

using Vector = std::vector<double>;

enum class SimilarityMetric { squared_l2_distance, cosine_similarity };

inline const char* metric_name(SimilarityMetric m) {
    return m == SimilarityMetric::squared_l2_distance ? "squared_l2_distance"
                                                      : "cosine_similarity";
}

inline SimilarityMetric parse_metric(const std::string& name) {
    if (name == "squared_l2_distance" || name == "l2") return SimilarityMetric::squared_l2_distance;
    if (name == "cosine_similarity" || name == "cosine") return SimilarityMetric::cosine_similarity;
    throw Error("unknown similarity metric: " + name);
}

// Ranking direction: distance ranks ascending, cosine descending.
inline bool better(SimilarityMetric metric, double a, double b) {
    return metric == SimilarityMetric::squared_l2_distance ? a < b : a > b;
}

inline double similarity(const Vector& a, const Vector& b, SimilarityMetric metric) {
    if (a.size() != b.size())
        throw DimMismatch("vector dims differ: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    if (metric == SimilarityMetric::squared_l2_distance) {
        double sum = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            double d = a[i] - b[i];
            sum += d * d;
        }
        return sum;
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine similarity with zero-norm operand");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct ScoredId {
    int id = 0;
    double score = 0.0;
};

// Best-first ranking under the metric, ties broken by lower id.
// Returns min(k, corpus size) entries.
inline std::vector<ScoredId> top_k(const Vector& query, const std::vector<Vector>& corpus,
                                   size_t k, SimilarityMetric metric) {
    if (corpus.empty()) throw EmptyCorpus("top_k over empty corpus");
    if (k < 1) throw Error("top_k requires k >= 1");
    std::vector<ScoredId> scored;
    scored.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i)
        scored.push_back({static_cast<int>(i), similarity(query, corpus[i], metric)});
    std::stable_sort(scored.begin(), scored.end(), [&](const ScoredId& x, const ScoredId& y) {
        if (x.score != y.score) return better(metric, x.score, y.score);
        return x.id < y.id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string provider_id() const = 0;
    virtual size_t dim() const = 0;
    // One vector per input text, order preserved.
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
};

// Deterministic feature-hashing embedder for offline runs and tests. Each
// token hashes to a signed bucket; the result is L2-normalized. It is a
// stand-in provider, not an approximation of any remote model's geometry.
class OfflineHashEmbedder final : public EmbeddingProvider {
public:
    explicit OfflineHashEmbedder(size_t dim = 256, std::uint64_t seed = 42)
        : dim_(dim), seed_(seed) {
        if (dim_ < 1) throw Error("embedding dim must be >= 1");
    }

    std::string provider_id() const override {
        return "offline-fnv-v1-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
    }

    size_t dim() const override { return dim_; }

    std::vector<Vector> embed(const std::vector<std::string>& texts) override {
        std::vector<Vector> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(embed_one(text));
        return out;
    }

    Vector embed_one(const std::string& text) const {
        Vector v(dim_, 0.0);
        auto tokens = corpus::tokenize(text);
        for (const auto& token : tokens) {
            std::uint64_t h = util::fnv1a64(token, 14695981039346656037ull ^ seed_);
            size_t bucket = static_cast<size_t>(h % dim_);
            double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
            v[bucket] += sign;
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        return v;
    }

private:
    size_t dim_;
    std::uint64_t seed_;
};

// Directory of content-addressed records keyed by (provider_id, text hash).
// Concurrent readers are safe; writes are serialized and atomic.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::optional<Vector> lookup(const std::string& provider_id, const std::string& text) const {
        auto path = record_path(provider_id, text);
        if (!std::filesystem::exists(path)) return std::nullopt;
        nlohmann::json j = nlohmann::json::parse(util::read_file(path), nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("values")) return std::nullopt;
        return j["values"].get<Vector>();
    }

    void store(const std::string& provider_id, const std::string& text, const Vector& v) {
        nlohmann::ordered_json j;
        j["provider_id"] = provider_id;
        j["text_sha256"] = util::sha256_hex(text);
        j["dim"] = v.size();
        j["values"] = v;
        std::lock_guard<std::mutex> lock(write_mutex_);
        util::atomic_write_file(record_path(provider_id, text), j.dump());
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path record_path(const std::string& provider_id,
                                      const std::string& text) const {
        // Keyed on provider_id so provider upgrades never serve stale vectors.
        std::string key = util::sha256_hex(provider_id + "\n" + text);
        return dir_ / (key + ".json");
    }

    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

// Embeds texts through the cache: hits are served as stored, misses go to the
// provider in one batch and are written through.
inline std::vector<Vector> embed_texts(EmbeddingProvider& provider,
                                       const std::vector<std::string>& texts,
                                       EmbeddingCache* cache = nullptr) {
    std::vector<Vector> out(texts.size());
    std::vector<size_t> misses;
    for (size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) throw Error("embed_texts: empty input text");
        if (cache) {
            if (auto hit = cache->lookup(provider.provider_id(), texts[i])) {
                out[i] = std::move(*hit);
                continue;
            }
        }
        misses.push_back(i);
    }
    if (!misses.empty()) {
        std::vector<std::string> batch;
        batch.reserve(misses.size());
        for (size_t i : misses) batch.push_back(texts[i]);
        auto vectors = provider.embed(batch);
        if (vectors.size() != batch.size())
            throw ProviderUnavailable("provider returned " + std::to_string(vectors.size()) +
                                      " vectors for " + std::to_string(batch.size()) + " texts");
        for (size_t j = 0; j < misses.size(); ++j) {
            if (vectors[j].size() != provider.dim())
                throw DimMismatch("provider returned dim " + std::to_string(vectors[j].size()) +
                                  ", expected " + std::to_string(provider.dim()));
            for (double x : vectors[j])
                if (!std::isfinite(x)) throw Error("provider returned non-finite value");
            if (cache) cache->store(provider.provider_id(), batch[j], vectors[j]);
            out[misses[j]] = std::move(vectors[j]);
        }
    }
    return out;
}

}  // namespace red::embed

#endif  // RED_EMBED_HPP
