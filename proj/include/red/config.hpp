#ifndef RED_CONFIG_HPP
#define RED_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "red/embed.hpp"
#include "red/errors.hpp"
#include "red/socialint.hpp"
#include "red/util.hpp"

namespace red::cli {

struct RunConfig {
    // providers
    std::string embed_provider = "offline";  // "offline" | "openai"
    std::string embed_model = "text-embedding-3-large";
    std::string embed_base_url;
    size_t offline_embed_dim = 256;
    std::string llm_provider = "mock";  // "mock" | "openai"
    std::string mock_fixture;           // fixture path when llm_provider == "mock"
    std::string chat_model = "gpt-4o";
    std::string chat_base_url;
    double temperature = 0.0;
    size_t context_window = 128000;
    int max_retries = 2;

    // pipeline
    size_t chunk_budget = 500;
    size_t retrieval_budget = 10;  // K
    size_t knowledge_top_m = 2;    // M
    size_t gaussian_dim = 500;
    embed::SimilarityMetric metric = embed::SimilarityMetric::squared_l2_distance;
    int threshold = 8;  // calibrated default; 10 = dataset convention
    bool adaptive = true;
    bool include_interviewer = true;
    socialint::AttachMode attach_mode = socialint::AttachMode::per_aspect;
    std::string knowledge_mode = "event";  // "event" | "text"
    size_t profile_copy_limit = 300;
    std::string event_encoder = "baseline";  // "baseline" | "table:<path>"

    // infra
    std::string template_dir;  // empty = built-in templates
    std::string cache_dir;     // empty = no embedding cache
    size_t concurrency = 1;
    std::uint64_t seed = 42;
    bool redact = false;

    void validate() const {
        if (chunk_budget < 1 || retrieval_budget < 1 || knowledge_top_m < 1 ||
            gaussian_dim < 1 || offline_embed_dim < 1 || concurrency < 1 ||
            context_window < 1)
            throw Error("all numeric config fields must be positive");
        if (threshold < 1 || threshold > 24) throw Error("threshold must be in (0,24]");
        if (max_retries < 0) throw Error("max_retries must be >= 0");
        if (knowledge_mode != "event" && knowledge_mode != "text")
            throw Error("knowledge_mode must be 'event' or 'text'");
    }
};

// Canonical JSON of the fields that determine report content. Local paths
// are excluded; the template set enters as a content hash so runs on
// different machines fingerprint identically.
inline std::string config_fingerprint(const RunConfig& config,
                                      const std::string& template_content_hash,
                                      const std::string& encoder_id) {
    nlohmann::ordered_json j;
    j["adaptive"] = config.adaptive;
    j["attach_mode"] =
        config.attach_mode == socialint::AttachMode::per_aspect ? "per_aspect" : "pooled";
    j["chat_model"] = config.chat_model;
    j["chunk_budget"] = config.chunk_budget;
    j["context_window"] = config.context_window;
    j["embed_model"] = config.embed_model;
    j["embed_provider"] = config.embed_provider;
    j["event_encoder_id"] = encoder_id;
    j["gaussian_dim"] = config.gaussian_dim;
    j["include_interviewer"] = config.include_interviewer;
    j["knowledge_mode"] = config.knowledge_mode;
    j["knowledge_top_m"] = config.knowledge_top_m;
    j["llm_provider"] = config.llm_provider;
    j["max_retries"] = config.max_retries;
    j["metric"] = embed::metric_name(config.metric);
    j["offline_embed_dim"] = config.offline_embed_dim;
    j["profile_copy_limit"] = config.profile_copy_limit;
    j["redact"] = config.redact;
    j["retrieval_budget"] = config.retrieval_budget;
    j["seed"] = config.seed;
    j["template_hash"] = template_content_hash;
    j["temperature"] = config.temperature;
    j["threshold"] = config.threshold;
    return util::sha256_hex(j.dump());
}

inline std::string run_id_from_fingerprint(const std::string& fingerprint) {
    return util::sha256_hex("red-run:" + fingerprint).substr(0, 12);
}

}  // namespace red::cli

#endif  // RED_CONFIG_HPP
