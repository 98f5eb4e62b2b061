#pragma once

#include <stdexcept>
#include <string>

namespace synthctl {

/// Pipeline stage an error originated from. Carried on every provider and
/// pipeline failure so callers can tell where a run stopped.
enum class Stage {
    Ingest,
    Anonymize,
    Summarize,
    Augment,
    Retrieve,
    Segment,
    Embed,
    Judge,
    Synthesize,
    Invert,
    Evaluate,
    Config,
};

const char* stage_name(Stage stage) noexcept;

class Error : public std::runtime_error {
public:
    Error(Stage stage, const std::string& what)
        : std::runtime_error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

/// A provider (local or remote) failed after exhausting its retries.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// A judge returned a payload that could not be parsed into a verdict.
class MalformedResponse : public Error {
public:
    explicit MalformedResponse(const std::string& what) : Error(Stage::Judge, what) {}
};

} // namespace synthctl
