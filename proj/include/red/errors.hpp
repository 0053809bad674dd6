#ifndef RED_ERRORS_HPP
#define RED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace red {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// corpus
struct EmptySession : Error {
    using Error::Error;
};
struct MalformedRecord : Error {
    MalformedRecord(const std::string& what, int line_no)
        : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    int line;
};
struct MissingDimension : Error {
    MissingDimension(const std::string& field_name, int line_no)
        : Error("missing dimension '" + field_name + "' (line " + std::to_string(line_no) + ")"),
          field(field_name), line(line_no) {}
    std::string field;
    int line;
};

// embed
struct DimMismatch : Error {
    using Error::Error;
};
struct ZeroVector : Error {
    using Error::Error;
};
struct EmptyCorpus : Error {
    using Error::Error;
};
struct ProviderUnavailable : Error {
    using Error::Error;
};

// agents
struct MalformedOutput : Error {
    using Error::Error;
};
struct ContextWindowExceeded : Error {
    using Error::Error;
};
struct TemplateError : Error {
    using Error::Error;
};

// socialint
struct EncoderUnavailable : Error {
    using Error::Error;
};
struct EmptyKnowledgeBase : Error {
    using Error::Error;
};

// scoring / eval
struct MissingAspect : Error {
    using Error::Error;
};
struct DuplicateAspect : Error {
    using Error::Error;
};
struct ScoreOutOfRange : Error {
    using Error::Error;
};
struct SessionMismatch : Error {
    using Error::Error;
};
struct EmptyGold : Error {
    using Error::Error;
};

// cli / pipeline
struct IoError : Error {
    using Error::Error;
};
// A session run aborts with the failing pipeline stage attached.
struct StageError : Error {
    StageError(const std::string& stage_name, const std::string& what)
        : Error("stage '" + stage_name + "': " + what), stage(stage_name) {}
    std::string stage;
};

}  // namespace red

#endif  // RED_ERRORS_HPP
