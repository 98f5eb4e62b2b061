#include "synthctl/evaluation.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "synthctl/error.hpp"
#include "synthctl/text.hpp"

namespace synthctl {

std::vector<CopesSample> load_copes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Stage::Evaluate, "cannot read dataset '" + path.string() + "'");

    std::vector<CopesSample> samples;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto where = path.string() + ": line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Stage::Evaluate, where + ": malformed JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("story_id") || !j["story_id"].is_string())
            throw Error(Stage::Evaluate, where + ": missing string field \"story_id\"");
        CopesSample s;
        s.story_id = j["story_id"].get<std::string>();
        const auto who = where + ": sample '" + s.story_id + "'";
        if (!j.contains("events") || !j["events"].is_array() || j["events"].size() != 5)
            throw Error(Stage::Evaluate, who + " must have exactly 5 events");
        if (!j.contains("labels") || !j["labels"].is_array() || j["labels"].size() != 4)
            throw Error(Stage::Evaluate, who + " must have exactly 4 labels");
        for (std::size_t i = 0; i < 5; ++i) {
            if (!j["events"][i].is_string() || trim(j["events"][i].get<std::string>()).empty())
                throw Error(Stage::Evaluate, who + ": event " + std::to_string(i + 1) +
                                                 " is not a non-empty string");
            s.events[i] = j["events"][i].get<std::string>();
        }
        for (std::size_t i = 0; i < 4; ++i) {
            if (!j["labels"][i].is_boolean())
                throw Error(Stage::Evaluate, who + ": label " + std::to_string(i + 1) +
                                                 " is not a boolean");
            s.labels[i] = j["labels"][i].get<bool>();
        }
        if (!seen.insert(s.story_id).second)
            throw Error(Stage::Evaluate, who + " is a duplicate story id");
        samples.push_back(std::move(s));
    }
    return samples;
}

void save_copes(const std::filesystem::path& path, std::span<const CopesSample> samples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error(Stage::Evaluate, "cannot write '" + path.string() + "'");
    for (const auto& s : samples)
        out << nlohmann::json{{"story_id", s.story_id}, {"events", s.events}, {"labels", s.labels}}
                   .dump()
            << '\n';
}

// ---------------------------------------------------------------------------

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

MetricsReport compute_metrics(std::span<const Label> predictions, std::span<const bool> gold,
                              IndeterminatePolicy policy) {
    if (predictions.size() != gold.size())
        throw Error(Stage::Evaluate, std::to_string(predictions.size()) + " predictions for " +
                                         std::to_string(gold.size()) + " gold labels");
    MetricsReport m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == Label::Indeterminate) {
            ++m.indeterminate_count;
            if (policy == IndeterminatePolicy::Excluded)
                continue;
        }
        const bool predicted = predictions[i] == Label::Causal;
        if (predicted && gold[i])
            ++m.tp;
        else if (predicted)
            ++m.fp;
        else if (gold[i])
            ++m.fn;
        else
            ++m.tn;
    }
    if (m.tp + m.fp > 0)
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0)
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

const char* method_name(Method method) {
    return method == Method::SyntheticControl ? "synthetic_control" : "counterfactual_prompting";
}

Method parse_method(std::string_view name) {
    if (name == "synthetic_control")
        return Method::SyntheticControl;
    if (name == "counterfactual_prompting")
        return Method::CounterfactualPrompting;
    throw Error(Stage::Config, "unknown method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

namespace {

using PairKey = std::pair<std::string, std::size_t>;

std::map<PairKey, nlohmann::json> read_manifest(const std::filesystem::path& path) {
    std::map<PairKey, nlohmann::json> done;
    std::ifstream in(path);
    if (!in)
        return done;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            continue; // torn final line from an interrupted run
        }
        if (!j.contains("story_id") || !j.contains("treatment_idx") || !j.contains("label"))
            continue;
        done.insert_or_assign(
            PairKey{j["story_id"].get<std::string>(), j["treatment_idx"].get<std::size_t>()},
            std::move(j));
    }
    return done;
}

nlohmann::json evaluate_pair(const CopesSample& sample, std::size_t idx, Method method,
                             const RetrievalContext* ctx, const PipelineConfig& cfg,
                             const Providers& providers) {
    if (method == Method::CounterfactualPrompting) {
        if (!providers.judge)
            throw Error(Stage::Config, "counterfactual prompting needs a judge provider");
        CounterfactualQuery q{{sample.events.begin(), sample.events.end()}, idx};
        const auto answer = providers.judge->counterfactual(q);
        const auto label = answer.causal ? Label::Causal : Label::NotCausal;
        return {{"story_id", sample.story_id},
                {"treatment_idx", idx},
                {"method", method_name(method)},
                {"label", label_name(label)},
                {"delta_hat", answer.causal ? 1 : 0},
                {"reasoning", answer.reasoning}};
    }

    if (!ctx)
        throw Error(Stage::Config, "synthetic control needs a corpus and index");
    EventSequence seq{{sample.events.begin(), sample.events.end()}, sample.story_id};
    const auto study = segment_study_unit(seq, idx, *providers.transform);
    const auto verdict = decide_causality(study, *ctx, cfg, providers);
    auto record = manifest_record(study, verdict);
    record["method"] = method_name(method);
    return record;
}

} // namespace

BenchmarkResult run_benchmark(std::span<const CopesSample> dataset, Method method,
                              const RetrievalContext* ctx, const PipelineConfig& cfg,
                              const Providers& providers, const BenchmarkOptions& options) {
    cfg.validate();
    std::map<PairKey, nlohmann::json> done;
    if (options.manifest_path)
        done = read_manifest(*options.manifest_path);

    struct Job {
        const CopesSample* sample;
        std::size_t idx;
    };
    std::vector<Job> pending;
    std::size_t resumed = 0;
    for (const auto& s : dataset) {
        for (std::size_t idx = 1; idx <= 4; ++idx) {
            if (done.contains({s.story_id, idx}))
                ++resumed;
            else
                pending.push_back({&s, idx});
        }
    }

    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        for (auto i = next++; i < pending.size(); i = next++) {
            const auto& job = pending[i];
            try {
                auto record = evaluate_pair(*job.sample, job.idx, method, ctx, cfg, providers);
                std::lock_guard lock(mutex);
                if (options.manifest_path)
                    append_jsonl(*options.manifest_path, record);
                done.insert_or_assign(PairKey{job.sample->story_id, job.idx}, std::move(record));
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure)
                    failure = std::current_exception();
                next = pending.size();
            }
        }
    };
    const auto threads =
        std::max<std::size_t>(1, std::min(options.parallelism, pending.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < threads; ++t)
            pool.emplace_back(worker);
        worker();
    }
    if (failure)
        std::rethrow_exception(failure); // completed pairs are already in the manifest

    BenchmarkResult result;
    result.resumed = resumed;
    std::vector<Label> predictions;
    std::vector<bool> gold; // vector<bool> is not contiguous; copied out below
    for (const auto& s : dataset) {
        for (std::size_t idx = 1; idx <= 4; ++idx) {
            auto& record = done.at({s.story_id, idx});
            PairRecord pr;
            pr.story_id = s.story_id;
            pr.treatment_idx = idx;
            pr.label = parse_label(record.at("label").get<std::string>());
            pr.gold = s.labels[idx - 1];
            pr.manifest = record;
            predictions.push_back(pr.label);
            gold.push_back(pr.gold);
            result.records.push_back(std::move(pr));
        }
    }
    std::unique_ptr<bool[]> gold_array(new bool[gold.size()]);
    for (std::size_t i = 0; i < gold.size(); ++i)
        gold_array[i] = gold[i];
    result.metrics = compute_metrics(predictions, std::span<const bool>(gold_array.get(), gold.size()),
                                     options.policy);
    return result;
}

nlohmann::json report_json(const BenchmarkResult& result, Method method,
                           const PipelineConfig& cfg, std::string_view provider_mode,
                           IndeterminatePolicy policy) {
    const auto& m = result.metrics;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records) {
        auto rec = r.manifest;
        rec["gold"] = r.gold;
        records.push_back(std::move(rec));
    }
    return {
        {"method", method_name(method)},
        {"provider_mode", provider_mode},
        {"indeterminate_policy",
         policy == IndeterminatePolicy::AsNegative ? "as_negative" : "excluded"},
        {"pairs", result.records.size()},
        {"counts",
         {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
          {"indeterminate", m.indeterminate_count}}},
        {"precision", m.precision},
        {"recall", m.recall},
        {"f1", m.f1},
        {"config",
         {{"n", cfg.n}, {"max_keep", cfg.max_keep}, {"min_keep", cfg.min_keep},
          {"cos_threshold", cfg.cos_threshold}, {"lambda", cfg.lambda},
          {"steps", cfg.steps}, {"beam_width", cfg.beam_width}}},
        {"records", std::move(records)},
    };
}

std::string format_table_row(Method method, const MetricsReport& metrics) {
    const char* label = method == Method::SyntheticControl ? "Synthetic Control" : "Counterfactual";
    char row[160];
    std::snprintf(row, sizeof(row), "%s & %.4f & %.4f & %.4f", label, metrics.precision,
                  metrics.recall, metrics.f1);
    return std::string(" & Precision & Recall & F1\n") + row + "\n";
}

} // namespace synthctl
