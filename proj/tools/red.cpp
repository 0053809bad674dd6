// Command-line front end: kb build, detect, evaluate.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "red/commands.hpp"
#include "red/config.hpp"

namespace {

void add_config_flags(CLI::App* cmd, red::cli::RunConfig& config, std::string& metric,
                      std::string& attach_mode) {
    cmd->add_option("--embed-provider", config.embed_provider,
                    "Embedding provider: offline | openai");
    cmd->add_option("--embed-model", config.embed_model, "Remote embedding model name");
    cmd->add_option("--embed-base-url", config.embed_base_url,
                    "OpenAI-compatible embeddings base URL, e.g. https://api.openai.com/v1");
    cmd->add_option("--embed-dim", config.offline_embed_dim, "Embedding dimension");
    cmd->add_option("--llm-provider", config.llm_provider, "LLM provider: mock | openai");
    cmd->add_option("--mock-fixture", config.mock_fixture,
                    "Scripted-mock fixture file (JSONL) for --llm-provider mock");
    cmd->add_option("--chat-model", config.chat_model, "Remote chat model name");
    cmd->add_option("--chat-base-url", config.chat_base_url,
                    "OpenAI-compatible chat base URL");
    cmd->add_option("--temperature", config.temperature, "Sampling temperature (default 0)");
    cmd->add_option("--context-window", config.context_window, "Provider context window");
    cmd->add_option("--max-retries", config.max_retries,
                    "Retries after malformed provider output");
    cmd->add_option("--chunk-budget", config.chunk_budget, "Chunk token budget");
    cmd->add_option("-k,--retrieval-budget", config.retrieval_budget,
                    "Evidence budget per aspect (K)");
    cmd->add_option("-m,--knowledge-top-m", config.knowledge_top_m,
                    "Knowledge attachments per event (M)");
    cmd->add_option("--gaussian-dim", config.gaussian_dim, "Event embedding dimension");
    cmd->add_option("--metric", metric, "squared_l2_distance | cosine_similarity");
    cmd->add_option("--threshold", config.threshold,
                    "Decision threshold on the predicted total (default 8)");
    cmd->add_flag("--fixed-k{false},!--adaptive", config.adaptive,
                  "Disable the judge and always retrieve K chunks");
    cmd->add_flag("--participant-only{false}", config.include_interviewer,
                  "Embed only participant turns for retrieval");
    cmd->add_option("--attach-mode", attach_mode, "per_aspect | pooled");
    cmd->add_option("--knowledge-mode", config.knowledge_mode,
                    "Knowledge retrieval: event | text");
    cmd->add_option("--copy-limit", config.profile_copy_limit,
                    "Max verbatim chars a profile may echo from one turn");
    cmd->add_option("--event-encoder", config.event_encoder,
                    "baseline | table:<precomputed embeddings file>");
    cmd->add_option("--templates", config.template_dir, "Prompt template directory");
    cmd->add_option("--cache-dir", config.cache_dir, "Embedding cache directory");
    cmd->add_option("--concurrency", config.concurrency, "Concurrent sessions");
    cmd->add_option("--seed", config.seed, "Random seed");
    cmd->add_flag("--redact", config.redact, "Replace evidence text with chunk hashes");
}

void finalize_config(red::cli::RunConfig& config, const std::string& metric,
                     const std::string& attach_mode) {
    config.metric = red::embed::parse_metric(metric);
    if (attach_mode == "per_aspect")
        config.attach_mode = red::socialint::AttachMode::per_aspect;
    else if (attach_mode == "pooled")
        config.attach_mode = red::socialint::AttachMode::pooled;
    else
        throw red::Error("unknown attach mode: " + attach_mode);
}

std::vector<int> parse_sweep(const std::string& spec) {
    std::vector<int> thresholds;
    if (spec.empty()) return thresholds;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        int lo = std::stoi(spec.substr(0, colon));
        int hi = std::stoi(spec.substr(colon + 1));
        for (int t = lo; t <= hi; ++t) thresholds.push_back(t);
        return thresholds;
    }
    size_t pos = 0;
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        thresholds.push_back(std::stoi(spec.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return thresholds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evidence-grounded depression screening over interview transcripts"};
    app.require_subcommand(1);

    red::cli::RunConfig config;
    std::string metric = "squared_l2_distance";
    std::string attach_mode = "per_aspect";

    // kb build
    auto* kb = app.add_subcommand("kb", "Knowledge-base commands");
    kb->require_subcommand(1);
    auto* kb_build = kb->add_subcommand("build", "Build the knowledge index");
    std::string kb_path, kb_out;
    kb_build->add_option("--kb", kb_path, "Knowledge-base JSONL file")->required();
    kb_build->add_option("--out", kb_out, "Output index path")->required();
    add_config_flags(kb_build, config, metric, attach_mode);

    // detect
    auto* detect = app.add_subcommand("detect", "Run detection over session transcripts");
    std::vector<std::string> session_files;
    std::string kb_index_path, run_dir;
    detect->add_option("sessions", session_files, "Session transcript files")->required();
    detect->add_option("--kb-index", kb_index_path, "Knowledge index path")->required();
    detect->add_option("--out", run_dir, "Run output directory")->required();
    add_config_flags(detect, config, metric, attach_mode);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score run reports against gold labels");
    red::cli::EvaluateOptions eval_options;
    std::string sweep_spec;
    evaluate->add_option("--run", eval_options.run_dirs, "Run directories (repeatable)")
        ->required();
    evaluate->add_option("--gold", eval_options.gold_labels_path, "Gold-label JSONL file")
        ->required();
    evaluate->add_option("--evidence-gold", eval_options.evidence_gold_path,
                         "Evidence-gold JSONL file");
    evaluate->add_option("--sweep", sweep_spec, "Threshold sweep: LO:HI or t1,t2,...");

    CLI11_PARSE(app, argc, argv);

    try {
        finalize_config(config, metric, attach_mode);
        if (kb_build->parsed()) return red::cli::cmd_kb_build(kb_path, kb_out, config);
        if (detect->parsed())
            return red::cli::cmd_detect(session_files, kb_index_path, run_dir, config);
        if (evaluate->parsed()) {
            eval_options.sweep_thresholds = parse_sweep(sweep_spec);
            return red::cli::cmd_evaluate(eval_options);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return red::cli::kExitUsage;
    }
    return red::cli::kExitUsage;
}
