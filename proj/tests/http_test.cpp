#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "red/embed.hpp"
#include "red/http_providers.hpp"

using namespace red;

namespace {

// Local OpenAI-compatible endpoint for exercising the HTTP providers offline.
struct LocalEndpoint {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> embed_requests{0};
    std::atomic<int> chat_requests{0};
    std::atomic<int> fail_next{0};  // respond 500 this many times

    LocalEndpoint() {
        server.Post("/v1/embeddings", [this](const httplib::Request& req,
                                             httplib::Response& res) {
            ++embed_requests;
            if (fail_next.fetch_sub(1) > 0) {
                res.status = 500;
                return;
            }
            fail_next = 0;
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json data = nlohmann::json::array();
            auto inputs = body.at("input");
            // answer in reverse order; the client must reassemble by index
            for (int i = static_cast<int>(inputs.size()) - 1; i >= 0; --i) {
                std::string text = inputs[static_cast<size_t>(i)].get<std::string>();
                data.push_back({{"index", i},
                                {"embedding", {double(text.size()), 1.0, 2.0}}});
            }
            res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
        });
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            ++chat_requests;
            if (fail_next.fetch_sub(1) > 0) {
                res.status = 500;
                return;
            }
            fail_next = 0;
            auto body = nlohmann::json::parse(req.body);
            std::string content = body.at("messages").at(0).at("content").get<std::string>();
            double temperature = body.at("temperature").get<double>();
            nlohmann::json reply{
                {"choices",
                 {{{"message",
                    {{"content", "echo:" + content + ":t" + std::to_string(int(temperature))}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalEndpoint() {
        server.stop();
        thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

http::HttpOptions fast_retry() {
    http::HttpOptions options;
    options.backoff_ms = 0;
    options.max_retries = 2;
    return options;
}

}  // namespace

TEST_CASE("base URL parsing splits origin and path prefix", "[http]") {
    auto e1 = http::parse_base_url("https://api.example.com/v1");
    CHECK(e1.origin == "https://api.example.com");
    CHECK(e1.path_prefix == "/v1");
    auto e2 = http::parse_base_url("http://localhost:8080");
    CHECK(e2.origin == "http://localhost:8080");
    CHECK(e2.path_prefix.empty());
    auto e3 = http::parse_base_url("http://gw.local/openai/v1/");
    CHECK(e3.origin == "http://gw.local");
    CHECK(e3.path_prefix == "/openai/v1");
    CHECK_THROWS_AS(http::parse_base_url("api.example.com"), Error);
}

TEST_CASE("embeddings client reassembles by index", "[http]") {
    LocalEndpoint endpoint;
    http::OpenAiEmbeddingProvider provider(endpoint.base_url(), "test-model", 3, fast_retry());
    auto vectors = provider.embed({"a", "longer text"});
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0][0] == 1.0);   // len("a")
    CHECK(vectors[1][0] == 11.0);  // len("longer text")
    CHECK(endpoint.embed_requests == 1);

    // cache integration serves the second call locally
    auto tmp = std::filesystem::temp_directory_path() / "red_http_cache_test";
    std::filesystem::remove_all(tmp);
    embed::EmbeddingCache cache(tmp);
    auto first = embed::embed_texts(provider, {"cached"}, &cache);
    auto second = embed::embed_texts(provider, {"cached"}, &cache);
    CHECK(first == second);
    CHECK(endpoint.embed_requests == 2);
    std::filesystem::remove_all(tmp);
}

TEST_CASE("embeddings client retries server errors", "[http]") {
    LocalEndpoint endpoint;
    endpoint.fail_next = 2;
    http::OpenAiEmbeddingProvider provider(endpoint.base_url(), "test-model", 3, fast_retry());
    auto vectors = provider.embed({"abc"});
    REQUIRE(vectors.size() == 1);
    CHECK(endpoint.embed_requests == 3);

    endpoint.fail_next = 100;
    CHECK_THROWS_AS(provider.embed({"abc"}), ProviderUnavailable);
}

TEST_CASE("an unreachable embeddings endpoint raises ProviderUnavailable", "[http]") {
    http::HttpOptions options;
    options.backoff_ms = 0;
    options.max_retries = 0;
    options.timeout_sec = 1;
    http::OpenAiEmbeddingProvider provider("http://127.0.0.1:9/v1", "m", 3, options);
    CHECK_THROWS_AS(provider.embed({"x"}), ProviderUnavailable);
}

TEST_CASE("chat client round-trips prompt and temperature", "[http]") {
    LocalEndpoint endpoint;
    http::OpenAiChatProvider provider(endpoint.base_url(), "chat-model", 0.0, 128000,
                                      fast_retry());
    auto reply = provider.complete({agents::PromptRole::judge, "should we continue"});
    CHECK(reply == "echo:should we continue:t0");
    CHECK(provider.context_window() == 128000);
}

TEST_CASE("chat client retries then fails over to ProviderUnavailable", "[http]") {
    LocalEndpoint endpoint;
    endpoint.fail_next = 1;
    http::OpenAiChatProvider provider(endpoint.base_url(), "chat-model", 0.0, 128000,
                                      fast_retry());
    CHECK(provider.complete({agents::PromptRole::judge, "x"}) == "echo:x:t0");
    CHECK(endpoint.chat_requests == 2);

    endpoint.fail_next = 1000;
    CHECK_THROWS_AS(provider.complete({agents::PromptRole::judge, "x"}), ProviderUnavailable);
}
