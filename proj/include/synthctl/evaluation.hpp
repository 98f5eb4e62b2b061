#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthctl/pipeline.hpp"

namespace synthctl {

/// Five chronological events; labels[i] says whether event i+1 causes
/// event 5.
struct CopesSample {
    std::string story_id;
    std::array<std::string, 5> events;
    std::array<bool, 4> labels{};

    bool operator==(const CopesSample&) const = default;
};

/// JSONL, one {"story_id", "events": [5 strings], "labels": [4 bools]} per
/// line. Samples with the wrong number of events or labels are rejected
/// with their id.
std::vector<CopesSample> load_copes(const std::filesystem::path& path);
void save_copes(const std::filesystem::path& path, std::span<const CopesSample> samples);

enum class IndeterminatePolicy { AsNegative, Excluded };

struct MetricsReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t indeterminate_count = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

double f1_score(double precision, double recall);

/// Micro-averaged over aligned (prediction, gold) pairs.
MetricsReport compute_metrics(std::span<const Label> predictions, std::span<const bool> gold,
                              IndeterminatePolicy policy = IndeterminatePolicy::AsNegative);

enum class Method { SyntheticControl, CounterfactualPrompting };

const char* method_name(Method method);
Method parse_method(std::string_view name);

struct PairRecord {
    std::string story_id;
    std::size_t treatment_idx = 0;
    Label label = Label::Indeterminate;
    bool gold = false;
    nlohmann::json manifest;
};

struct BenchmarkOptions {
    std::size_t parallelism = 1;
    IndeterminatePolicy policy = IndeterminatePolicy::AsNegative;
    /// Per-pair JSONL manifest. Pairs already present are not re-run.
    std::optional<std::filesystem::path> manifest_path;
};

struct BenchmarkResult {
    MetricsReport metrics;
    std::vector<PairRecord> records; // dataset order, then treatment index
    std::size_t resumed = 0;         // pairs read back from the manifest
};

/// Evaluate every (sample, candidate treatment) pair. The retrieval context
/// is only consulted for the synthetic-control method.
BenchmarkResult run_benchmark(std::span<const CopesSample> dataset, Method method,
                              const RetrievalContext* ctx, const PipelineConfig& cfg,
                              const Providers& providers, const BenchmarkOptions& options = {});

/// Report with counts, metrics, config echo, provider mode and per-pair
/// records.
nlohmann::json report_json(const BenchmarkResult& result, Method method,
                           const PipelineConfig& cfg, std::string_view provider_mode,
                           IndeterminatePolicy policy);

/// Table-shaped text: a header row and one "method & P & R & F1" row.
std::string format_table_row(Method method, const MetricsReport& metrics);

} // namespace synthctl
