#ifndef RED_COMMANDS_HPP
#define RED_COMMANDS_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "red/agents.hpp"
#include "red/config.hpp"
#include "red/corpus.hpp"
#include "red/embed.hpp"
#include "red/errors.hpp"
#include "red/eval.hpp"
#include "red/http_providers.hpp"
#include "red/pipeline.hpp"
#include "red/report.hpp"
#include "red/socialint.hpp"

namespace red::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSessionFailure = 3;

namespace detail {

inline std::unique_ptr<embed::EmbeddingProvider> make_embedder(const RunConfig& config) {
    if (config.embed_provider == "offline")
        return std::make_unique<embed::OfflineHashEmbedder>(config.offline_embed_dim, config.seed);
    if (config.embed_provider == "openai") {
        if (config.embed_base_url.empty())
            throw Error("openai embed provider requires --embed-base-url");
        // The remote dim is whatever the model returns; trust the first
        // response via a lazy probe is avoided by requiring the config dim.
        return std::make_unique<http::OpenAiEmbeddingProvider>(
            config.embed_base_url, config.embed_model, config.offline_embed_dim);
    }
    throw Error("unknown embed provider: " + config.embed_provider);
}

inline std::unique_ptr<agents::LlmProvider> make_llm(const RunConfig& config) {
    if (config.llm_provider == "mock") {
        if (config.mock_fixture.empty())
            throw Error("mock llm provider requires --mock-fixture");
        return std::make_unique<agents::ScriptedLlmProvider>(
            agents::ScriptedLlmProvider::from_file(config.mock_fixture));
    }
    if (config.llm_provider == "openai") {
        if (config.chat_base_url.empty())
            throw Error("openai llm provider requires --chat-base-url");
        return std::make_unique<http::OpenAiChatProvider>(
            config.chat_base_url, config.chat_model, config.temperature, config.context_window);
    }
    throw Error("unknown llm provider: " + config.llm_provider);
}

inline std::unique_ptr<socialint::EventEncoder> make_encoder(const RunConfig& config) {
    if (config.event_encoder == "baseline")
        return std::make_unique<socialint::BaselineHashEncoder>(config.gaussian_dim);
    if (config.event_encoder.rfind("table:", 0) == 0)
        return std::make_unique<socialint::TableEventEncoder>(
            socialint::TableEventEncoder::from_file(config.event_encoder.substr(6)));
    throw Error("unknown event encoder: " + config.event_encoder);
}

inline agents::TemplateSet make_templates(const RunConfig& config) {
    return config.template_dir.empty() ? agents::TemplateSet::defaults()
                                       : agents::TemplateSet::load_dir(config.template_dir);
}

inline std::string template_content_hash(const agents::TemplateSet& templates) {
    std::string all;
    for (agents::PromptRole role : agents::kPromptRoles) {
        all += agents::prompt_role_name(role);
        all += '\0';
        all += templates.get(role).text;
        all += '\0';
    }
    for (const auto& q : retrieval::default_basic_queries()) {
        all += scoring::aspect_name(q.aspect);
        all += '\0';
        all += q.text;
        all += '\0';
    }
    return util::sha256_hex(all);
}

inline double x100(double v) { return v * 100.0; }

inline nlohmann::ordered_json classification_json(const eval::ClassificationReport& r) {
    nlohmann::ordered_json j;
    j["depressed"] = {{"precision", x100(r.depressed.precision)},
                      {"recall", x100(r.depressed.recall)},
                      {"f1", x100(r.depressed.f1)}};
    j["control"] = {{"precision", x100(r.control.precision)},
                    {"recall", x100(r.control.recall)},
                    {"f1", x100(r.control.f1)}};
    j["macro_f1"] = x100(r.macro_f1);
    j["sessions"] = r.sessions;
    return j;
}

}  // namespace detail

// Builds the knowledge index from a knowledge-base file and persists it.
inline int cmd_kb_build(const std::string& kb_path, const std::string& out_path,
                        const RunConfig& config, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    try {
        config.validate();
        auto kb = corpus::load_knowledge_base(util::read_file(kb_path));
        if (kb.empty()) throw EmptyKnowledgeBase("knowledge base has no entries: " + kb_path);
        auto llm = detail::make_llm(config);
        auto encoder = detail::make_encoder(config);
        auto templates = detail::make_templates(config);
        agents::AgentRuntime rt{*llm, templates,
                                agents::AgentOptions{config.max_retries,
                                                     config.profile_copy_limit},
                                nullptr};
        socialint::EventExtractor extractor = [&](const std::string& text) {
            return agents::extract_events(rt, text);
        };
        auto index = socialint::build_kb_index(kb, extractor, *encoder);
        index.save(out_path);
        out << "knowledge index: " << index.entries.size() << " entries, "
            << index.event_count() << " events, encoder " << index.encoder_id << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "kb build failed: " << e.what() << "\n";
        return kExitUsage;
    }
}

struct SessionOutcome {
    std::string file;
    std::string session_id;
    bool ok = false;
    std::string error;
};

// Runs detection over session files into a run directory:
//   <run_dir>/manifest.json, provider_log.jsonl, reports/<session_id>.json
inline int cmd_detect(const std::vector<std::string>& session_files,
                      const std::string& kb_index_path, const std::string& run_dir,
                      const RunConfig& config, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    namespace fs = std::filesystem;
    socialint::KBIndex kb_index;
    std::unique_ptr<embed::EmbeddingProvider> embedder;
    std::unique_ptr<agents::LlmProvider> llm;
    std::unique_ptr<socialint::EventEncoder> encoder;
    std::unique_ptr<embed::EmbeddingCache> cache;
    agents::TemplateSet templates;
    std::string fingerprint, run_id;
    try {
        config.validate();
        if (session_files.empty()) throw Error("no session files given");
        kb_index = socialint::KBIndex::load(kb_index_path);
        embedder = detail::make_embedder(config);
        llm = detail::make_llm(config);
        encoder = detail::make_encoder(config);
        if (config.knowledge_mode == "event" && encoder->encoder_id() != kb_index.encoder_id)
            throw Error("index encoder '" + kb_index.encoder_id +
                        "' does not match configured encoder '" + encoder->encoder_id() + "'");
        templates = detail::make_templates(config);
        if (!config.cache_dir.empty())
            cache = std::make_unique<embed::EmbeddingCache>(config.cache_dir);
        fingerprint =
            config_fingerprint(config, detail::template_content_hash(templates),
                               encoder->encoder_id());
        run_id = run_id_from_fingerprint(fingerprint);
        fs::create_directories(fs::path(run_dir) / "reports");
    } catch (const Error& e) {
        err << "detect failed: " << e.what() << "\n";
        return kExitUsage;
    }

    agents::RunRecord record(fs::path(run_dir) / "provider_log.jsonl");
    auto queries = retrieval::default_basic_queries();
    std::vector<SessionOutcome> outcomes(session_files.size());

    auto process = [&](size_t i) {
        SessionOutcome& outcome = outcomes[i];
        outcome.file = session_files[i];
        try {
            auto session = corpus::parse_session(util::read_file(session_files[i]));
            outcome.session_id = session.session_id;
            retrieval::PipelineDeps deps{*embedder, *llm,        *encoder, kb_index,
                                         templates, cache.get(), &record};
            auto report = retrieval::run_red(session, queries, deps, config, run_id, fingerprint);
            util::atomic_write_file(fs::path(run_dir) / "reports" / (report.session_id + ".json"),
                                    report.to_json());
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
    };

    if (config.concurrency <= 1) {
        for (size_t i = 0; i < session_files.size(); ++i) process(i);
    } else {
        std::vector<std::thread> workers;
        std::atomic<size_t> next{0};
        size_t n_workers = std::min(config.concurrency, session_files.size());
        for (size_t w = 0; w < n_workers; ++w)
            workers.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < session_files.size();
                     i = next.fetch_add(1))
                    process(i);
            });
        for (auto& t : workers) t.join();
    }

    nlohmann::ordered_json manifest;
    manifest["schema"] = "red.manifest.v1";
    manifest["run_id"] = run_id;
    manifest["config_fingerprint"] = fingerprint;
    manifest["threshold"] = config.threshold;
    manifest["sessions"] = nlohmann::ordered_json::array();
    bool any_failed = false;
    for (const auto& outcome : outcomes) {
        nlohmann::ordered_json js;
        js["file"] = outcome.file;
        js["session_id"] = outcome.session_id;
        js["status"] = outcome.ok ? "ok" : "failed";
        if (!outcome.ok) {
            js["error"] = outcome.error;
            any_failed = true;
            err << "session failed (" << outcome.file << "): " << outcome.error << "\n";
        }
        manifest["sessions"].push_back(std::move(js));
    }
    util::atomic_write_file(fs::path(run_dir) / "manifest.json", manifest.dump(2) + "\n");
    out << "run " << run_id << ": " << outcomes.size() << " sessions, "
        << (any_failed ? "with failures" : "all ok") << "\n";
    return any_failed ? kExitSessionFailure : kExitOk;
}

struct EvaluateOptions {
    std::vector<std::string> run_dirs;
    std::string gold_labels_path;
    std::string evidence_gold_path;  // optional
    std::vector<int> sweep_thresholds;  // optional
};

namespace detail {

struct RunData {
    eval::LabeledSessions predictions;
    std::vector<std::pair<std::string, int>> totals;
    std::map<std::string, std::set<int>> retrieved_turns;
};

inline RunData load_run(const std::string& run_dir) {
    namespace fs = std::filesystem;
    RunData data;
    fs::path reports_dir = fs::path(run_dir) / "reports";
    if (!fs::exists(reports_dir)) throw IoError("no reports directory in " + run_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports_dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        auto report = DetectionReport::from_json(util::read_file(file));
        data.predictions.emplace_back(report.session_id, scoring::parse_label(report.label));
        data.totals.emplace_back(report.session_id, report.total);
        auto& turns = data.retrieved_turns[report.session_id];
        for (const auto& a : report.aspects)
            for (const auto& item : a.evidence)
                for (int t = item.turn_begin; t < item.turn_end; ++t) turns.insert(t);
    }
    if (data.predictions.empty()) throw IoError("no reports found in " + run_dir);
    return data;
}

// Element-wise arithmetic mean over structurally identical JSON documents.
inline nlohmann::ordered_json average_fields(const std::vector<nlohmann::ordered_json>& rows) {
    std::function<nlohmann::ordered_json(const std::vector<const nlohmann::ordered_json*>&)>
        walk = [&](const std::vector<const nlohmann::ordered_json*>& nodes)
        -> nlohmann::ordered_json {
        const auto& first = *nodes.front();
        if (first.is_object()) {
            nlohmann::ordered_json out;
            for (auto it = first.begin(); it != first.end(); ++it) {
                std::vector<const nlohmann::ordered_json*> children;
                children.reserve(nodes.size());
                for (const auto* n : nodes) children.push_back(&n->at(it.key()));
                out[it.key()] = walk(children);
            }
            return out;
        }
        if (first.is_number()) {
            double sum = 0.0;
            for (const auto* n : nodes) sum += n->get<double>();
            return sum / static_cast<double>(nodes.size());
        }
        return first;
    };
    std::vector<const nlohmann::ordered_json*> roots;
    roots.reserve(rows.size());
    for (const auto& r : rows) roots.push_back(&r);
    return walk(roots);
}

}  // namespace detail

// Computes the seven classification metrics (and optional evidence metrics
// and threshold sweep) over one or more run directories; metrics from
// multiple runs are arithmetically averaged. The metrics document lands in
// <first run dir>/metrics/metrics.json and on stdout.
inline int cmd_evaluate(const EvaluateOptions& options, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    namespace fs = std::filesystem;
    try {
        if (options.run_dirs.empty()) throw Error("no run directories given");
        auto gold_records = eval::load_gold_labels(util::read_file(options.gold_labels_path));
        eval::LabeledSessions golds;
        for (const auto& g : gold_records) golds.emplace_back(g.session_id, g.label);

        std::vector<nlohmann::ordered_json> per_run;
        std::vector<nlohmann::ordered_json> per_run_evidence;
        std::map<int, std::vector<nlohmann::ordered_json>> sweep_rows;

        for (const auto& run_dir : options.run_dirs) {
            auto data = detail::load_run(run_dir);
            auto report = eval::classification_metrics(data.predictions, golds);
            per_run.push_back(detail::classification_json(report));

            if (!options.evidence_gold_path.empty()) {
                auto evidence_gold =
                    eval::load_evidence_gold(util::read_file(options.evidence_gold_path));
                size_t pooled_hit = 0, pooled_retrieved = 0, pooled_gold = 0;
                for (const auto& gold : evidence_gold) {
                    auto it = data.retrieved_turns.find(gold.session_id);
                    if (it == data.retrieved_turns.end()) continue;
                    if (gold.gold_turn_indices.empty()) {
                        err << "warning: empty evidence gold for session " << gold.session_id
                            << ", skipped\n";
                        continue;
                    }
                    for (int t : it->second)
                        if (gold.gold_turn_indices.count(t)) ++pooled_hit;
                    pooled_retrieved += it->second.size();
                    pooled_gold += gold.gold_turn_indices.size();
                }
                double precision = eval::safe_div(static_cast<double>(pooled_hit),
                                                  static_cast<double>(pooled_retrieved));
                double recall = eval::safe_div(static_cast<double>(pooled_hit),
                                               static_cast<double>(pooled_gold));
                nlohmann::ordered_json je;
                je["precision"] = detail::x100(precision);
                je["recall"] = detail::x100(recall);
                je["f1"] = detail::x100(eval::f1_from(precision, recall));
                per_run_evidence.push_back(std::move(je));
            }

            if (!options.sweep_thresholds.empty()) {
                auto rows =
                    eval::threshold_sweep(data.totals, golds, options.sweep_thresholds);
                for (const auto& row : rows)
                    sweep_rows[row.threshold].push_back(detail::classification_json(row.metrics));
            }
        }

        nlohmann::ordered_json doc;
        doc["schema"] = "red.metrics.v1";
        doc["runs"] = options.run_dirs.size();
        doc["classification"] = detail::average_fields(per_run);
        if (per_run.size() > 1) doc["classification_per_run"] = per_run;
        if (!per_run_evidence.empty())
            doc["evidence"] = detail::average_fields(per_run_evidence);
        if (!sweep_rows.empty()) {
            doc["sweep"] = nlohmann::ordered_json::array();
            for (int threshold : options.sweep_thresholds) {
                nlohmann::ordered_json row;
                row["threshold"] = threshold;
                row["metrics"] = detail::average_fields(sweep_rows.at(threshold));
                doc["sweep"].push_back(std::move(row));
            }
        }

        util::atomic_write_file(fs::path(options.run_dirs[0]) / "metrics" / "metrics.json",
                                doc.dump(2) + "\n");
        out << doc.dump(2) << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "evaluate failed: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace red::cli

#endif  // RED_COMMANDS_HPP
