#include "synthctl/error.hpp"

namespace synthctl {

const char* stage_name(Stage stage) noexcept {
    switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Anonymize: return "anonymize";
    case Stage::Summarize: return "summarize";
    case Stage::Augment: return "augment";
    case Stage::Retrieve: return "retrieve";
    case Stage::Segment: return "segment";
    case Stage::Embed: return "embed";
    case Stage::Judge: return "judge";
    case Stage::Synthesize: return "synthesize";
    case Stage::Invert: return "invert";
    case Stage::Evaluate: return "evaluate";
    case Stage::Config: return "config";
    }
    return "unknown";
}

} // namespace synthctl
