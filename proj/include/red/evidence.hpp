#ifndef RED_EVIDENCE_HPP
#define RED_EVIDENCE_HPP

#include <string>
#include <vector>

#include "red/scoring.hpp"

namespace red::retrieval {

struct BasicQuery {
    scoring::Aspect aspect = scoring::Aspect::interest;
    std::string text;
};

struct PersonalQuery {
    scoring::Aspect aspect = scoring::Aspect::interest;
    std::string text;
    bool fallback = false;  // true when the basic text was kept after retries
};

// One screening question per aspect.
inline std::vector<BasicQuery> default_basic_queries() {
    using scoring::Aspect;
    return {
        {Aspect::interest,
         "Has the participant lost interest or pleasure in things they used to enjoy?"},
        {Aspect::depressed_mood,
         "Has the participant been feeling down, depressed, or hopeless?"},
        {Aspect::sleep,
         "Has the participant had trouble falling asleep, staying asleep, or sleeping too much?"},
        {Aspect::fatigue, "Has the participant been feeling tired or low on energy?"},
        {Aspect::appetite, "Has the participant had a poor appetite or been overeating?"},
        {Aspect::failure,
         "Has the participant been feeling bad about themselves, like a failure, or that they "
         "have let people down?"},
        {Aspect::concentration,
         "Has the participant had trouble concentrating on things such as reading or watching "
         "television?"},
        {Aspect::movement,
         "Has the participant been moving or speaking noticeably slowly, or been unusually "
         "fidgety or restless?"},
    };
}

struct EvidenceItem {
    int chunk_id = 0;
    scoring::Aspect aspect = scoring::Aspect::interest;
    int rank = 0;  // retrieval iteration, 0-based
    double score = 0.0;
    std::string text;   // verbatim chunk text
    int turn_begin = 0;  // turns the chunk covers, [begin, end)
    int turn_end = 0;
};

struct EvidenceSet {
    scoring::Aspect aspect = scoring::Aspect::interest;
    std::vector<EvidenceItem> items;
    bool insufficient_evidence = false;  // set when no chunks were available
};

inline std::string render_evidence(const EvidenceSet& evidence) {
    if (evidence.items.empty()) return "(no evidence)";
    std::string out;
    for (const auto& item : evidence.items) {
        out += "[chunk " + std::to_string(item.chunk_id) + "]\n" + item.text + "\n";
    }
    out.pop_back();
    return out;
}

}  // namespace red::retrieval

#endif  // RED_EVIDENCE_HPP
