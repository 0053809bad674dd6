#ifndef RED_SCORING_HPP
#define RED_SCORING_HPP

#include <array>
#include <map>
#include <string>

#include "red/errors.hpp"

namespace red::scoring {

// The eight screening aspects, in canonical order.
enum class Aspect {
    interest,
    depressed_mood,
    sleep,
    fatigue,
    appetite,
    failure,
    concentration,
    movement
};

inline constexpr std::array<Aspect, 8> kAspects = {
    Aspect::interest, Aspect::depressed_mood, Aspect::sleep,          Aspect::fatigue,
    Aspect::appetite, Aspect::failure,        Aspect::concentration, Aspect::movement};

inline const char* aspect_name(Aspect a) {
    switch (a) {
        case Aspect::interest: return "interest";
        case Aspect::depressed_mood: return "depressed_mood";
        case Aspect::sleep: return "sleep";
        case Aspect::fatigue: return "fatigue";
        case Aspect::appetite: return "appetite";
        case Aspect::failure: return "failure";
        case Aspect::concentration: return "concentration";
        case Aspect::movement: return "movement";
    }
    return "?";
}

inline Aspect parse_aspect(const std::string& name) {
    for (Aspect a : kAspects)
        if (name == aspect_name(a)) return a;
    throw Error("unknown aspect: " + name);
}

enum class Label { depressed, control };

inline const char* label_name(Label l) { return l == Label::depressed ? "depressed" : "control"; }

inline Label parse_label(const std::string& name) {
    if (name == "depressed") return Label::depressed;
    if (name == "control") return Label::control;
    throw Error("unknown label: " + name);
}

struct Prediction {
    std::string session_id;
    std::map<Aspect, int> aspect_scores;
    int total = 0;
    int threshold_used = 0;
    Label label = Label::control;
};

// Sum of the eight per-aspect scores; requires exactly one score per aspect.
inline int aggregate_scores(const std::map<Aspect, int>& aspect_scores) {
    if (aspect_scores.size() > kAspects.size()) throw DuplicateAspect("more than 8 aspect scores");
    int total = 0;
    for (Aspect a : kAspects) {
        auto it = aspect_scores.find(a);
        if (it == aspect_scores.end())
            throw MissingAspect(std::string("missing aspect: ") + aspect_name(a));
        if (it->second < 0 || it->second > 3)
            throw ScoreOutOfRange("aspect score out of range [0,3]: " +
                                  std::to_string(it->second));
        total += it->second;
    }
    return total;
}

// Depressed iff total >= threshold.
inline Label classify(int total, int threshold) {
    if (total < 0 || total > 24)
        throw ScoreOutOfRange("total out of range [0,24]: " + std::to_string(total));
    if (threshold < 1 || threshold > 24)
        throw ScoreOutOfRange("threshold out of range (0,24]: " + std::to_string(threshold));
    return total >= threshold ? Label::depressed : Label::control;
}

inline Prediction make_prediction(const std::string& session_id,
                                  const std::map<Aspect, int>& aspect_scores, int threshold) {
    Prediction p;
    p.session_id = session_id;
    p.aspect_scores = aspect_scores;
    p.total = aggregate_scores(aspect_scores);
    p.threshold_used = threshold;
    p.label = classify(p.total, threshold);
    return p;
}

}  // namespace red::scoring

#endif  // RED_SCORING_HPP
