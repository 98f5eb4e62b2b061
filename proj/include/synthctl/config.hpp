#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "synthctl/evaluation.hpp"
#include "synthctl/pipeline.hpp"

namespace synthctl {

enum class Mode { Mock, Live };

/// Everything a CLI run needs. JSON schema (every key optional):
///
///   {
///     "mode": "mock" | "live",
///     "n": 100, "max_keep": 5, "min_keep": 2, "cos_threshold": 0.8,
///     "lambda": 1.0, "steps": 10, "beam_width": 4,
///     "parallelism": 1, "seed": 0,
///     "indeterminate_policy": "as_negative" | "excluded",
///     "paths": {"corpus", "index", "cache", "embedding_cache", "dataset", "output"},
///     "endpoints": {"embed", "invert", "judge"},
///     "embedding_model": "text-embedding-ada-002",
///     "mock": {"dim": 256, "judge_threshold": 0.6, "names": {"Mary": "a girl"}}
///   }
///
/// Environment: SYNTHCTL_EMBED_URL, SYNTHCTL_INVERT_URL, SYNTHCTL_JUDGE_URL
/// fill missing endpoints; SYNTHCTL_API_TOKEN is sent as a bearer token.
/// Text transforms use the judge endpoint's /transform route.
struct RunConfig {
    PipelineConfig pipeline;
    Mode mode = Mode::Mock;
    std::size_t parallelism = 1;
    std::uint64_t seed = 0;
    IndeterminatePolicy policy = IndeterminatePolicy::AsNegative;

    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> index;
    std::optional<std::filesystem::path> cache;
    std::optional<std::filesystem::path> embedding_cache;
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> output;

    std::string embed_url;
    std::string invert_url;
    std::string judge_url;
    std::string api_token;
    std::string embedding_model = "text-embedding-ada-002";

    std::size_t mock_dim = 256;
    double mock_judge_threshold = MockJudge::kDefaultThreshold;
    std::optional<MockTransformProvider::NameRoles> mock_names;

    /// Throws Error(Stage::Config) on a bad key or value.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    void apply_environment();
    /// Live mode needs all three endpoints; mock mode needs none.
    void validate() const;
};

const char* mode_name(Mode mode);
Mode parse_mode(std::string_view name);

Providers make_providers(const RunConfig& cfg);

} // namespace synthctl
