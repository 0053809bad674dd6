#ifndef RED_HTTP_PROVIDERS_HPP
#define RED_HTTP_PROVIDERS_HPP

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "red/embed.hpp"
#include "red/errors.hpp"
#include "red/llm.hpp"

namespace red::http {

struct Endpoint {
    std::string origin;       // scheme://host[:port]
    std::string path_prefix;  // e.g. "/v1"
};

inline Endpoint parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw Error("base URL must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

inline std::string api_key_from_env(const char* primary) {
    if (const char* v = std::getenv(primary); v && *v) return v;
    if (const char* v = std::getenv("OPENAI_API_KEY"); v && *v) return v;
    return "";
}

struct HttpOptions {
    int max_retries = 2;      // connection errors and 5xx responses
    int backoff_ms = 250;
    int timeout_sec = 120;
};

namespace detail {

// POSTs a JSON body, retrying transient failures. Returns the response body.
inline std::string post_json(const Endpoint& endpoint, const std::string& path,
                             const std::string& api_key, const std::string& body,
                             const HttpOptions& options) {
    std::string last_error;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        if (attempt > 0 && options.backoff_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(options.backoff_ms * attempt));
        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(options.timeout_sec);
        client.set_read_timeout(options.timeout_sec);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = client.Post(endpoint.path_prefix + path, headers, body, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProviderUnavailable("endpoint returned " + std::to_string(res->status) + ": " +
                                      res->body.substr(0, 200));
        return res->body;
    }
    throw ProviderUnavailable("request failed after retries: " + last_error);
}

}  // namespace detail

// OpenAI-compatible embeddings endpoint:
//   POST {base}/embeddings  {"model": ..., "input": [...]}
//   -> {"data": [{"index": i, "embedding": [...]}], ...}
class OpenAiEmbeddingProvider final : public embed::EmbeddingProvider {
public:
    OpenAiEmbeddingProvider(std::string base_url, std::string model, size_t dim,
                            HttpOptions options = {},
                            const char* api_key_env = "RED_EMBED_API_KEY")
        : endpoint_(parse_base_url(base_url)),
          model_(std::move(model)),
          dim_(dim),
          options_(options),
          api_key_(api_key_from_env(api_key_env)) {}

    std::string provider_id() const override { return "openai-embed:" + model_; }
    size_t dim() const override { return dim_; }

    std::vector<embed::Vector> embed(const std::vector<std::string>& texts) override {
        nlohmann::ordered_json body;
        body["model"] = model_;
        body["input"] = texts;
        std::string raw =
            detail::post_json(endpoint_, "/embeddings", api_key_, body.dump(), options_);
        nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
        if (j.is_discarded() || !j.contains("data") || !j["data"].is_array())
            throw ProviderUnavailable("malformed embeddings response");
        std::vector<embed::Vector> out(texts.size());
        std::vector<bool> filled(texts.size(), false);
        for (const auto& item : j["data"]) {
            size_t index = item.at("index").get<size_t>();
            if (index >= out.size()) throw ProviderUnavailable("embedding index out of range");
            out[index] = item.at("embedding").get<embed::Vector>();
            filled[index] = true;
        }
        for (bool f : filled)
            if (!f) throw ProviderUnavailable("embeddings response missing entries");
        return out;
    }

private:
    Endpoint endpoint_;
    std::string model_;
    size_t dim_;
    HttpOptions options_;
    std::string api_key_;
};

// OpenAI-compatible chat-completions endpoint:
//   POST {base}/chat/completions  {"model", "messages", "temperature"}
//   -> {"choices": [{"message": {"content": ...}}]}
class OpenAiChatProvider final : public agents::LlmProvider {
public:
    OpenAiChatProvider(std::string base_url, std::string model, double temperature = 0.0,
                       size_t context_window = 128000, HttpOptions options = {},
                       const char* api_key_env = "RED_CHAT_API_KEY")
        : endpoint_(parse_base_url(base_url)),
          model_(std::move(model)),
          temperature_(temperature),
          context_window_(context_window),
          options_(options),
          api_key_(api_key_from_env(api_key_env)) {}

    std::string provider_id() const override { return "openai-chat:" + model_; }
    size_t context_window() const override { return context_window_; }

    std::string complete(const agents::LlmRequest& request) override {
        nlohmann::ordered_json body;
        body["model"] = model_;
        body["messages"] =
            nlohmann::ordered_json::array({{{"role", "user"}, {"content", request.prompt}}});
        body["temperature"] = temperature_;
        std::string raw =
            detail::post_json(endpoint_, "/chat/completions", api_key_, body.dump(), options_);
        nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
            throw ProviderUnavailable("malformed chat response");
        const auto& message = j["choices"][0].at("message");
        return message.at("content").get<std::string>();
    }

private:
    Endpoint endpoint_;
    std::string model_;
    double temperature_;
    size_t context_window_;
    HttpOptions options_;
    std::string api_key_;
};

}  // namespace red::http

#endif  // RED_HTTP_PROVIDERS_HPP
