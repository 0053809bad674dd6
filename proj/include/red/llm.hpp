#ifndef RED_LLM_HPP
#define RED_LLM_HPP

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/errors.hpp"
#include "red/prompts.hpp"
#include "red/util.hpp"

namespace red::agents {

struct LlmRequest {
    PromptRole role = PromptRole::profile;
    std::string prompt;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual std::string provider_id() const = 0;
    virtual size_t context_window() const { return 128000; }
    virtual std::string complete(const LlmRequest& request) = 0;
};

// Append-only log of provider exchanges. Replaying a log through
// ReplayLlmProvider reproduces identical downstream artifacts.
class RunRecord {
public:
    struct Exchange {
        int seq = 0;
        std::string stage;
        int attempt = 0;  // 0 = first try
        std::string role;
        std::string prompt;
        std::string response;
        std::string error;  // empty on success
        long long elapsed_us = 0;
    };

    RunRecord() = default;
    explicit RunRecord(std::filesystem::path file) : file_(std::move(file)) {
        std::filesystem::create_directories(file_->parent_path());
        out_.open(*file_, std::ios::app);
        if (!out_) throw IoError("cannot open run record: " + file_->string());
    }

    void append(Exchange e) {
        std::lock_guard<std::mutex> lock(mutex_);
        e.seq = static_cast<int>(entries_.size());
        if (out_.is_open()) {
            nlohmann::ordered_json j;
            j["seq"] = e.seq;
            j["stage"] = e.stage;
            j["attempt"] = e.attempt;
            j["role"] = e.role;
            j["prompt"] = e.prompt;
            j["response"] = e.response;
            if (!e.error.empty()) j["error"] = e.error;
            j["elapsed_us"] = e.elapsed_us;
            out_ << j.dump() << '\n';
            out_.flush();
        }
        entries_.push_back(std::move(e));
    }

    std::vector<Exchange> entries() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_;
    }

    static std::vector<Exchange> parse(std::string_view jsonl) {
        std::vector<Exchange> out;
        for (const auto& line : util::split_lines(jsonl)) {
            if (util::trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            Exchange e;
            e.seq = j.value("seq", 0);
            e.stage = j.value("stage", "");
            e.attempt = j.value("attempt", 0);
            e.role = j.value("role", "");
            e.prompt = j.value("prompt", "");
            e.response = j.value("response", "");
            e.error = j.value("error", "");
            e.elapsed_us = j.value("elapsed_us", 0ll);
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    std::optional<std::filesystem::path> file_;
    std::ofstream out_;
    mutable std::mutex mutex_;
    std::vector<Exchange> entries_;
};

// Deterministic fixture-driven provider. Entries are tried in order; the
// first whose role matches and whose `contains` substrings all appear in the
// prompt, and that has uses left, is consumed. `uses` < 0 means unlimited.
class ScriptedLlmProvider final : public LlmProvider {
public:
    struct Entry {
        std::optional<PromptRole> role;
        std::vector<std::string> contains;
        std::string response;
        int uses = -1;
    };

    ScriptedLlmProvider() = default;

    static ScriptedLlmProvider from_jsonl(std::string_view raw) {
        ScriptedLlmProvider p;
        int line_no = 0;
        for (const auto& line : util::split_lines(raw)) {
            ++line_no;
            if (util::trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw MalformedRecord("scripted-provider record is not a JSON object", line_no);
            Entry e;
            if (j.contains("role")) e.role = parse_role(j["role"].get<std::string>(), line_no);
            if (j.contains("contains"))
                for (const auto& s : j["contains"]) e.contains.push_back(s.get<std::string>());
            e.response = j.value("response", "");
            e.uses = j.value("uses", -1);
            p.add(std::move(e));
        }
        return p;
    }

    static ScriptedLlmProvider from_file(const std::filesystem::path& path) {
        return from_jsonl(util::read_file(path));
    }

    void add(Entry entry) { entries_.push_back(std::move(entry)); }

    void add(PromptRole role, std::vector<std::string> contains, std::string response,
             int uses = -1) {
        entries_.push_back(Entry{role, std::move(contains), std::move(response), uses});
    }

    std::string provider_id() const override { return "scripted-mock"; }

    std::string complete(const LlmRequest& request) override {
        std::lock_guard<std::mutex> lock(*mutex_);
        for (auto& entry : entries_) {
            if (entry.uses == 0) continue;
            if (entry.role && *entry.role != request.role) continue;
            bool matched = true;
            for (const auto& needle : entry.contains) {
                if (request.prompt.find(needle) == std::string::npos) {
                    matched = false;
                    break;
                }
            }
            if (!matched) continue;
            if (entry.uses > 0) --entry.uses;
            return entry.response;
        }
        throw ProviderUnavailable(std::string("no scripted response for role '") +
                                  prompt_role_name(request.role) + "', prompt: " +
                                  request.prompt.substr(0, 120));
    }

private:
    static PromptRole parse_role(const std::string& name, int line_no) {
        for (PromptRole r : kPromptRoles)
            if (name == prompt_role_name(r)) return r;
        throw MalformedRecord("unknown prompt role '" + name + "'", line_no);
    }

    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::vector<Entry> entries_;
};

// Serves responses recorded in a run record, keyed by (role, prompt), in
// log order.
class ReplayLlmProvider final : public LlmProvider {
public:
    explicit ReplayLlmProvider(const std::vector<RunRecord::Exchange>& exchanges) {
        for (const auto& e : exchanges) {
            // Exchanges that failed inside the provider carry no response to
            // replay; malformed-output exchanges do and must be re-served so
            // retries unfold identically.
            if (e.error.rfind("provider:", 0) == 0) continue;
            queues_[e.role + "\n" + e.prompt].push_back(e.response);
        }
    }

    static ReplayLlmProvider from_file(const std::filesystem::path& path) {
        return ReplayLlmProvider(RunRecord::parse(util::read_file(path)));
    }

    std::string provider_id() const override { return "replay"; }

    std::string complete(const LlmRequest& request) override {
        std::lock_guard<std::mutex> lock(*mutex_);
        auto it = queues_.find(std::string(prompt_role_name(request.role)) + "\n" + request.prompt);
        if (it == queues_.end() || it->second.empty())
            throw ProviderUnavailable("no recorded response for prompt: " +
                                      request.prompt.substr(0, 120));
        std::string response = it->second.front();
        it->second.pop_front();
        return response;
    }

private:
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::map<std::string, std::deque<std::string>> queues_;
};

}  // namespace red::agents

#endif  // RED_LLM_HPP
