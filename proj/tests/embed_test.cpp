#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "red/embed.hpp"

using namespace red;
using embed::SimilarityMetric;
using embed::Vector;

namespace {

// Independent ranking oracle: repeated linear scans with the tie rule.
std::vector<embed::ScoredId> exhaustive_top_k(const Vector& query,
                                              const std::vector<Vector>& corpus, size_t k,
                                              SimilarityMetric metric) {
    std::vector<bool> taken(corpus.size(), false);
    std::vector<embed::ScoredId> out;
    while (out.size() < std::min(k, corpus.size())) {
        int best = -1;
        double best_score = 0;
        for (size_t i = 0; i < corpus.size(); ++i) {
            if (taken[i]) continue;
            double s = embed::similarity(query, corpus[i], metric);
            if (best < 0 || embed::better(metric, s, best_score)) {
                best = static_cast<int>(i);
                best_score = s;
            }
        }
        taken[static_cast<size_t>(best)] = true;
        out.push_back({best, best_score});
    }
    return out;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("red_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

struct FailingProvider final : embed::EmbeddingProvider {
    std::string provider_id() const override { return "failing"; }
    size_t dim() const override { return 4; }
    std::vector<Vector> embed(const std::vector<std::string>&) override {
        throw ProviderUnavailable("down");
    }
};

struct WrongDimProvider final : embed::EmbeddingProvider {
    std::string provider_id() const override { return "wrongdim"; }
    size_t dim() const override { return 4; }
    std::vector<Vector> embed(const std::vector<std::string>& texts) override {
        return std::vector<Vector>(texts.size(), Vector{1.0, 2.0});
    }
};

}  // namespace

TEST_CASE("similarity fixtures", "[embed]") {
    CHECK(embed::similarity({1, 2, 3}, {1, 2, 3}, SimilarityMetric::squared_l2_distance) == 0.0);
    CHECK(embed::similarity({0, 0}, {3, 4}, SimilarityMetric::squared_l2_distance) == 25.0);
    CHECK(embed::similarity({1, 0}, {2, 0}, SimilarityMetric::cosine_similarity) ==
          Catch::Approx(1.0));
    CHECK(embed::similarity({1, 0}, {0, 1}, SimilarityMetric::cosine_similarity) ==
          Catch::Approx(0.0).margin(1e-12));
    CHECK(embed::similarity({1, 0}, {-1, 0}, SimilarityMetric::cosine_similarity) ==
          Catch::Approx(-1.0));
}

TEST_CASE("similarity error paths", "[embed]") {
    CHECK_THROWS_AS(embed::similarity({1, 2}, {1, 2, 3}, SimilarityMetric::squared_l2_distance),
                    DimMismatch);
    CHECK_THROWS_AS(embed::similarity({0, 0}, {1, 0}, SimilarityMetric::cosine_similarity),
                    ZeroVector);
}

TEST_CASE("similarity is symmetric and bounded", "[embed][property]") {
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 200; ++trial) {
        size_t dim = 1 + rng() % 16;
        Vector a(dim), b(dim);
        for (auto& x : a) x = gauss(rng);
        for (auto& x : b) x = gauss(rng);
        double l2ab = embed::similarity(a, b, SimilarityMetric::squared_l2_distance);
        double l2ba = embed::similarity(b, a, SimilarityMetric::squared_l2_distance);
        CHECK(l2ab == l2ba);
        CHECK(l2ab >= 0.0);
        double na = 0, nb = 0;
        for (auto x : a) na += x * x;
        for (auto x : b) nb += x * x;
        if (na > 0 && nb > 0) {
            double cab = embed::similarity(a, b, SimilarityMetric::cosine_similarity);
            CHECK(cab == embed::similarity(b, a, SimilarityMetric::cosine_similarity));
            CHECK(cab <= 1.0 + 1e-9);
            CHECK(cab >= -1.0 - 1e-9);
        }
    }
}

TEST_CASE("top_k fixtures", "[embed]") {
    std::vector<Vector> corpus = {{1, 0}, {2, 0}, {3, 0}};
    auto ranked = embed::top_k({0, 0}, corpus, 2, SimilarityMetric::squared_l2_distance);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].id == 0);
    CHECK(ranked[0].score == 1.0);
    CHECK(ranked[1].id == 1);
    CHECK(ranked[1].score == 4.0);

    SECTION("k beyond the corpus returns the full ranking") {
        auto all = embed::top_k({0, 0}, corpus, 10, SimilarityMetric::squared_l2_distance);
        REQUIRE(all.size() == 3);
        CHECK(all[2].id == 2);
    }
    SECTION("equidistant vectors rank by lower id") {
        std::vector<Vector> tie = {{1, 0}, {-1, 0}, {0, 1}};
        auto r = embed::top_k({0, 0}, tie, 3, SimilarityMetric::squared_l2_distance);
        CHECK(r[0].id == 0);
        CHECK(r[1].id == 1);
        CHECK(r[2].id == 2);
    }
    SECTION("empty corpus") {
        CHECK_THROWS_AS(embed::top_k({0, 0}, {}, 1, SimilarityMetric::squared_l2_distance),
                        EmptyCorpus);
    }
}

TEST_CASE("top_k matches the exhaustive oracle", "[embed][property]") {
    std::mt19937 rng(1234);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> small(-2, 2);  // forces score ties
    for (int trial = 0; trial < 100; ++trial) {
        size_t dim = 1 + rng() % 8;
        size_t n = 1 + rng() % 256;
        bool integer_grid = trial % 2 == 0;
        std::vector<Vector> corpus(n, Vector(dim));
        Vector query(dim);
        for (auto& x : query) x = integer_grid ? small(rng) : gauss(rng);
        for (auto& v : corpus)
            for (auto& x : v) x = integer_grid ? small(rng) : gauss(rng);
        size_t k = 1 + rng() % (n + 2);
        auto metric = trial % 3 == 0 ? SimilarityMetric::cosine_similarity
                                     : SimilarityMetric::squared_l2_distance;
        if (metric == SimilarityMetric::cosine_similarity) {
            // keep queries/corpus away from the zero vector for cosine
            query[0] += 10.0;
            for (auto& v : corpus) v[0] += 10.0;
        }
        auto got = embed::top_k(query, corpus, k, metric);
        auto want = exhaustive_top_k(query, corpus, k, metric);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == want[i].id);
            CHECK(got[i].score == want[i].score);
        }
    }
}

TEST_CASE("offline embedder is deterministic", "[embed]") {
    embed::OfflineHashEmbedder a(64, 42), b(64, 42), other_seed(64, 7);
    auto va = a.embed({"hello"})[0];
    auto vb = b.embed({"hello"})[0];
    CHECK(va == vb);
    CHECK(va.size() == 64);
    CHECK(a.provider_id() == b.provider_id());
    CHECK(a.provider_id() != other_seed.provider_id());
    double norm = 0;
    for (double x : va) norm += x * x;
    CHECK(norm == Catch::Approx(1.0));
    CHECK(a.embed({"hello"})[0] != a.embed({"goodbye"})[0]);
}

TEST_CASE("embed_texts preserves order and matches per-item calls", "[embed]") {
    embed::OfflineHashEmbedder provider(32);
    std::vector<std::string> texts = {"first text", "second text", "third text"};
    auto batch = embed::embed_texts(provider, texts);
    REQUIRE(batch.size() == 3);
    for (size_t i = 0; i < texts.size(); ++i)
        CHECK(batch[i] == embed::embed_texts(provider, {texts[i]})[0]);
    CHECK_THROWS_AS(embed::embed_texts(provider, {""}), Error);
}

TEST_CASE("embed_texts rejects wrong provider dims", "[embed]") {
    WrongDimProvider provider;
    CHECK_THROWS_AS(embed::embed_texts(provider, {"x"}), DimMismatch);
}

TEST_CASE("cache round-trip returns bit-identical vectors", "[embed]") {
    TempDir dir;
    embed::EmbeddingCache cache(dir.path);
    embed::OfflineHashEmbedder provider(32);
    auto cold = embed::embed_texts(provider, {"some text"}, &cache);
    auto warm = embed::embed_texts(provider, {"some text"}, &cache);
    CHECK(cold == warm);
}

TEST_CASE("warm cache entries are served without the provider", "[embed]") {
    TempDir dir;
    embed::EmbeddingCache cache(dir.path);
    embed::OfflineHashEmbedder provider(4);
    auto cold = embed::embed_texts(provider, {"cached text"}, &cache)[0];

    // A hand-planted record under the same key proves lookups short-circuit
    // the provider.
    cache.store(provider.provider_id(), "cached text", Vector{9.0, 9.0, 9.0, 9.0});
    auto warm = embed::embed_texts(provider, {"cached text"}, &cache)[0];
    CHECK(warm == Vector{9.0, 9.0, 9.0, 9.0});
    CHECK(cold != warm);
}

TEST_CASE("cache hits are keyed by provider id", "[embed]") {
    TempDir dir;
    embed::EmbeddingCache cache(dir.path);
    embed::OfflineHashEmbedder small(8), large(16);
    auto v_small = embed::embed_texts(small, {"text"}, &cache)[0];
    auto v_large = embed::embed_texts(large, {"text"}, &cache)[0];
    CHECK(v_small.size() == 8);
    CHECK(v_large.size() == 16);
    CHECK(cache.lookup(small.provider_id(), "text").value() == v_small);
    CHECK(cache.lookup(large.provider_id(), "text").value() == v_large);
    CHECK_FALSE(cache.lookup("unknown-provider", "text").has_value());
}
