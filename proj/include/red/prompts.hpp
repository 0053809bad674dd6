#ifndef RED_PROMPTS_HPP
#define RED_PROMPTS_HPP

#include <array>
#include <filesystem>
#include <map>
#include <string>

#include "red/errors.hpp"
#include "red/util.hpp"

namespace red::agents {

enum class PromptRole { profile, personalize, judge, event_extract, preliminary, final_assess };

inline constexpr std::array<PromptRole, 6> kPromptRoles = {
    PromptRole::profile,     PromptRole::personalize, PromptRole::judge,
    PromptRole::event_extract, PromptRole::preliminary, PromptRole::final_assess};

inline const char* prompt_role_name(PromptRole r) {
    switch (r) {
        case PromptRole::profile: return "profile";
        case PromptRole::personalize: return "personalize";
        case PromptRole::judge: return "judge";
        case PromptRole::event_extract: return "event_extract";
        case PromptRole::preliminary: return "preliminary";
        case PromptRole::final_assess: return "final";
    }
    return "?";
}

struct PromptTemplate {
    PromptRole role = PromptRole::profile;
    std::string text;

    // Substitutes {{name}} placeholders. Every placeholder must be bound.
    std::string render(const std::map<std::string, std::string>& bindings) const {
        std::string out;
        out.reserve(text.size());
        size_t pos = 0;
        while (pos < text.size()) {
            size_t open = text.find("{{", pos);
            if (open == std::string::npos) {
                out.append(text, pos, std::string::npos);
                break;
            }
            size_t close = text.find("}}", open + 2);
            if (close == std::string::npos)
                throw TemplateError("unterminated placeholder in template '" +
                                    std::string(prompt_role_name(role)) + "'");
            out.append(text, pos, open - pos);
            std::string name = text.substr(open + 2, close - open - 2);
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw TemplateError("unbound placeholder '" + name + "' in template '" +
                                    prompt_role_name(role) + "'");
            out += it->second;
            pos = close + 2;
        }
        return out;
    }
};

namespace default_templates {

inline constexpr const char* kProfile =
    "You are reviewing a screening interview transcript.\n"
    "Summarize the participant's background in a short profile: living situation, work,\n"
    "recent life events, and anything relevant to mood, sleep, appetite, energy, or daily\n"
    "functioning. Write in your own words; do not copy long passages verbatim.\n"
    "\n"
    "Transcript:\n"
    "{{dialogue}}\n"
    "\n"
    "Profile:";

inline constexpr const char* kPersonalize =
    "Rewrite the screening question below so it fits this participant's background.\n"
    "Keep the clinical intent of the {{aspect}} aspect. Reply with the rewritten\n"
    "question only.\n"
    "\n"
    "Participant profile:\n"
    "{{profile}}\n"
    "\n"
    "Screening question:\n"
    "{{basic_query}}\n"
    "\n"
    "Rewritten question:";

inline constexpr const char* kJudge =
    "You are deciding whether more interview evidence is needed to assess one\n"
    "screening aspect.\n"
    "\n"
    "Question:\n"
    "{{query}}\n"
    "\n"
    "Evidence collected so far:\n"
    "{{evidence}}\n"
    "\n"
    "Is more evidence needed to answer the question? Reply with YES or NO only.";

inline constexpr const char* kEventExtract =
    "Extract event triplets from the text below. Reply with a JSON array; each element\n"
    "is an object with \"subject\", \"predicate\", and \"object\" (object may be an empty\n"
    "string for intransitive events). Reply with [] if there is no event.\n"
    "\n"
    "Text:\n"
    "{{text}}\n"
    "\n"
    "Events:";

inline constexpr const char* kPreliminary =
    "Rate the {{aspect}} aspect on a 0-3 scale (0 = not at all, 3 = nearly every day)\n"
    "using only the evidence below. Reply with a JSON object\n"
    "{\"score\": <0-3>, \"rationale\": \"<short reason>\"}.\n"
    "\n"
    "Question:\n"
    "{{query}}\n"
    "\n"
    "Evidence:\n"
    "{{evidence}}\n"
    "\n"
    "Assessment:";

inline constexpr const char* kFinal =
    "You are completing an eight-aspect depression screening from interview evidence.\n"
    "Rate each aspect 0-3 (0 = not at all, 3 = nearly every day). Reply with a JSON\n"
    "object of the form\n"
    "{\"scores\": {\"interest\": n, \"depressed_mood\": n, \"sleep\": n, \"fatigue\": n,\n"
    "\"appetite\": n, \"failure\": n, \"concentration\": n, \"movement\": n},\n"
    "\"justification\": \"<short reason>\"}.\n"
    "\n"
    "Preliminary ratings:\n"
    "{{preliminary}}\n"
    "\n"
    "Evidence with supporting knowledge:\n"
    "{{evidence}}\n"
    "\n"
    "Assessment:";

}  // namespace default_templates

class TemplateSet {
public:
    static TemplateSet defaults() {
        TemplateSet set;
        set.set(PromptRole::profile, default_templates::kProfile);
        set.set(PromptRole::personalize, default_templates::kPersonalize);
        set.set(PromptRole::judge, default_templates::kJudge);
        set.set(PromptRole::event_extract, default_templates::kEventExtract);
        set.set(PromptRole::preliminary, default_templates::kPreliminary);
        set.set(PromptRole::final_assess, default_templates::kFinal);
        return set;
    }

    // Loads <role>.txt files over the defaults; missing files keep defaults.
    static TemplateSet load_dir(const std::filesystem::path& dir) {
        TemplateSet set = defaults();
        for (PromptRole role : kPromptRoles) {
            auto path = dir / (std::string(prompt_role_name(role)) + ".txt");
            if (std::filesystem::exists(path)) set.set(role, util::read_file(path));
        }
        return set;
    }

    const PromptTemplate& get(PromptRole role) const {
        auto it = templates_.find(role);
        if (it == templates_.end())
            throw TemplateError(std::string("no template for role '") + prompt_role_name(role) +
                                "'");
        return it->second;
    }

    void set(PromptRole role, std::string text) {
        templates_[role] = PromptTemplate{role, std::move(text)};
    }

private:
    std::map<PromptRole, PromptTemplate> templates_;
};

}  // namespace red::agents

#endif  // RED_PROMPTS_HPP
