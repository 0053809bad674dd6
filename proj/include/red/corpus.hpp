#ifndef RED_CORPUS_HPP
#define RED_CORPUS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "red/errors.hpp"
#include "red/tokenize.hpp"
#include "red/util.hpp"

namespace red::corpus {

enum class Speaker { interviewer, participant };

inline const char* speaker_name(Speaker s) {
    return s == Speaker::interviewer ? "interviewer" : "participant";
}

struct Turn {
    int index = 0;
    Speaker speaker = Speaker::participant;
    std::string text;
};

struct Session {
    std::string session_id;
    std::vector<Turn> turns;
    std::optional<int> gold_phq8;
    std::optional<std::string> gold_label;  // "depressed" | "control"
};

struct Chunk {
    int chunk_id = 0;
    std::string session_id;
    int turn_begin = 0;  // inclusive
    int turn_end = 0;    // exclusive
    std::string text;
    size_t token_count = 0;
};

struct KnowledgeEntry {
    int entry_id = 0;
    std::string situation;
    std::string clue;
    std::string thought;
    std::string action;
    std::string emotion;
    std::string key;    // situation + " " + clue
    std::string value;  // serialized thought/action/emotion
};

struct ParseOptions {
    // Speakers matching one of these (case-insensitive) normalize to
    // interviewer; every other label maps to participant.
    std::vector<std::string> interviewer_aliases{"interviewer", "ellie"};
};

// The dataset convention: totals at or above 10 are labeled depressed.
inline constexpr int kDatasetLabelThreshold = 10;

namespace detail {

inline nlohmann::json parse_json_line(const std::string& line, int line_no) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw MalformedRecord("record is not a JSON object", line_no);
    return j;
}

inline std::string require_string(const nlohmann::json& j, const char* field, int line_no) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string())
        throw MalformedRecord(std::string("missing or non-string field '") + field + "'", line_no);
    return it->get<std::string>();
}

}  // namespace detail

// Transcript format: one JSON record per line. The first record is the
// session header {session_id, gold_phq8?, gold_label?}; each following
// record is a turn {speaker, text}.
inline Session parse_session(std::string_view raw, const ParseOptions& opts = {}) {
    auto lines = util::split_lines(raw);
    if (lines.empty()) throw EmptySession("transcript has no records");

    Session session;
    int line_no = 1;
    {
        nlohmann::json header = detail::parse_json_line(lines[0], line_no);
        session.session_id = detail::require_string(header, "session_id", line_no);
        if (header.contains("gold_phq8")) {
            if (!header["gold_phq8"].is_number_integer())
                throw MalformedRecord("gold_phq8 must be an integer", line_no);
            int total = header["gold_phq8"].get<int>();
            if (total < 0 || total > 24)
                throw MalformedRecord("gold_phq8 out of range [0,24]", line_no);
            session.gold_phq8 = total;
        }
        if (header.contains("gold_label")) {
            std::string label = detail::require_string(header, "gold_label", line_no);
            if (label != "depressed" && label != "control")
                throw MalformedRecord("gold_label must be 'depressed' or 'control'", line_no);
            session.gold_label = label;
        }
        if (session.gold_phq8 && session.gold_label) {
            std::string expected =
                *session.gold_phq8 >= kDatasetLabelThreshold ? "depressed" : "control";
            if (*session.gold_label != expected)
                throw MalformedRecord("gold_label inconsistent with gold_phq8", line_no);
        }
    }

    for (size_t i = 1; i < lines.size(); ++i) {
        line_no = static_cast<int>(i) + 1;
        if (util::trim(lines[i]).empty()) continue;
        nlohmann::json rec = detail::parse_json_line(lines[i], line_no);
        std::string speaker_label = detail::require_string(rec, "speaker", line_no);
        std::string text = detail::require_string(rec, "text", line_no);
        if (util::trim(text).empty()) throw MalformedRecord("turn text is empty", line_no);

        Turn turn;
        turn.index = static_cast<int>(session.turns.size());
        std::string lowered = util::to_lower(util::trim(speaker_label));
        turn.speaker = Speaker::participant;
        for (const auto& alias : opts.interviewer_aliases) {
            if (lowered == util::to_lower(alias)) {
                turn.speaker = Speaker::interviewer;
                break;
            }
        }
        turn.text = std::move(text);
        session.turns.push_back(std::move(turn));
    }

    if (session.turns.empty()) throw EmptySession("transcript has no turns");
    return session;
}

inline std::string session_to_jsonl(const Session& session) {
    nlohmann::ordered_json header;
    header["session_id"] = session.session_id;
    if (session.gold_phq8) header["gold_phq8"] = *session.gold_phq8;
    if (session.gold_label) header["gold_label"] = *session.gold_label;
    std::string out = header.dump();
    out.push_back('\n');
    for (const auto& turn : session.turns) {
        nlohmann::ordered_json rec;
        rec["speaker"] = speaker_name(turn.speaker);
        rec["text"] = turn.text;
        out += rec.dump();
        out.push_back('\n');
    }
    return out;
}

inline std::string render_turn(const Turn& turn) {
    return std::string(speaker_name(turn.speaker)) + ": " + turn.text;
}

inline std::string render_dialogue(const Session& session) {
    std::string out;
    for (const auto& turn : session.turns) {
        out += render_turn(turn);
        out.push_back('\n');
    }
    if (!out.empty()) out.pop_back();
    return out;
}

// Greedy packing of consecutive turns. A chunk closes before adding a turn
// that would exceed the budget; a single turn longer than the budget becomes
// its own oversized chunk. Token accounting covers turn text only, not the
// speaker prefixes added when rendering.
inline std::vector<Chunk> chunk_session(const Session& session, size_t budget = 500) {
    if (budget < 1) throw Error("chunk budget must be >= 1");

    std::vector<Chunk> chunks;
    size_t current_tokens = 0;
    int current_begin = 0;

    auto close_chunk = [&](int end_exclusive) {
        Chunk chunk;
        chunk.chunk_id = static_cast<int>(chunks.size());
        chunk.session_id = session.session_id;
        chunk.turn_begin = current_begin;
        chunk.turn_end = end_exclusive;
        chunk.token_count = current_tokens;
        std::string text;
        for (int t = chunk.turn_begin; t < chunk.turn_end; ++t) {
            text += render_turn(session.turns[static_cast<size_t>(t)]);
            text.push_back('\n');
        }
        if (!text.empty()) text.pop_back();
        chunk.text = std::move(text);
        chunks.push_back(std::move(chunk));
    };

    for (const auto& turn : session.turns) {
        size_t turn_tokens = count_tokens(turn.text);
        bool has_turns = turn.index > current_begin;
        if (has_turns && current_tokens + turn_tokens > budget) {
            close_chunk(turn.index);
            current_begin = turn.index;
            current_tokens = 0;
        }
        current_tokens += turn_tokens;
    }
    close_chunk(static_cast<int>(session.turns.size()));
    return chunks;
}

// Text a chunk contributes to retrieval embeddings. With
// include_interviewer=false only participant turns are embedded; the chunk
// itself still covers every turn so the partition invariant holds.
inline std::string chunk_embed_text(const Session& session, const Chunk& chunk,
                                    bool include_interviewer = true) {
    if (include_interviewer) return chunk.text;
    std::string out;
    for (int t = chunk.turn_begin; t < chunk.turn_end; ++t) {
        const auto& turn = session.turns[static_cast<size_t>(t)];
        if (turn.speaker != Speaker::participant) continue;
        out += render_turn(turn);
        out.push_back('\n');
    }
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string serialize_knowledge_value(const std::string& thought, const std::string& action,
                                             const std::string& emotion) {
    return "thought: " + thought + "; action: " + action + "; emotion: " + emotion;
}

// Knowledge-base format: one JSON record per line with the five dimension
// fields {situation, clue, thought, action, emotion}.
inline std::vector<KnowledgeEntry> load_knowledge_base(std::string_view raw) {
    std::vector<KnowledgeEntry> entries;
    auto lines = util::split_lines(raw);
    for (size_t i = 0; i < lines.size(); ++i) {
        int line_no = static_cast<int>(i) + 1;
        if (util::trim(lines[i]).empty()) continue;
        nlohmann::json rec = detail::parse_json_line(lines[i], line_no);
        KnowledgeEntry entry;
        entry.entry_id = static_cast<int>(entries.size());
        for (const char* field : {"situation", "clue", "thought", "action", "emotion"}) {
            auto it = rec.find(field);
            if (it == rec.end() || !it->is_string()) throw MissingDimension(field, line_no);
        }
        entry.situation = rec["situation"].get<std::string>();
        entry.clue = rec["clue"].get<std::string>();
        entry.thought = rec["thought"].get<std::string>();
        entry.action = rec["action"].get<std::string>();
        entry.emotion = rec["emotion"].get<std::string>();
        if (util::trim(entry.situation).empty()) throw MissingDimension("situation", line_no);
        if (util::trim(entry.clue).empty()) throw MissingDimension("clue", line_no);
        entry.key = entry.situation + " " + entry.clue;
        entry.value = serialize_knowledge_value(entry.thought, entry.action, entry.emotion);
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace red::corpus

#endif  // RED_CORPUS_HPP
