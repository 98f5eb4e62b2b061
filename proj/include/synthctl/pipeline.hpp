#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthctl/corpus.hpp"
#include "synthctl/embedding.hpp"
#include "synthctl/inversion.hpp"
#include "synthctl/judging.hpp"
#include "synthctl/retrieval.hpp"
#include "synthctl/synthesis.hpp"

namespace synthctl {

struct PipelineConfig {
    std::size_t n = 100;         // retrieval size
    std::size_t max_keep = 5;
    std::size_t min_keep = 2;
    double cos_threshold = 0.8;  // pretreatment similarity and treatment dissimilarity
    double lambda = 1.0;
    int steps = 10;
    int beam_width = 4;

    void validate() const;
};

/// Treatment e1, observed outcome e2 and the covariates that precede e1.
/// Raw text goes to the judge; the anonymized copies drive retrieval and
/// embedding.
struct StudyUnit {
    std::string story_id;
    std::vector<std::string> source_events;
    std::size_t treatment_idx = 0; // 1-based position of e1
    bool augmented_context = false;

    std::vector<std::string> pretreatment;
    std::string treatment;
    std::string outcome;

    std::vector<std::string> anon_pretreatment;
    std::string anon_treatment;
    std::string anon_outcome;
};

/// Split `events` around the 1-based `treatment_idx`. The outcome is the
/// last event. A treatment in first position gets a generated pretreatment.
StudyUnit segment_study_unit(const EventSequence& events, std::size_t treatment_idx,
                             const TextTransformProvider& provider);

struct SegmentTexts {
    std::string pretreatment;
    std::string intervention;
    std::string outcome;

    bool operator==(const SegmentTexts&) const = default;
};

/// With m events and study pretreatment length t, k = min(t, m - 2):
/// pretreatment = events 1..k, intervention = event k+1, outcome = the rest.
/// Returns nullopt when m < 3.
std::optional<SegmentTexts> segment_control(const std::vector<std::string>& summary,
                                            std::size_t t);

struct ControlUnit {
    std::string doc_id;
    std::size_t retrieval_rank = 0;
    SegmentTexts raw;
    SegmentTexts anonymized;
    std::optional<EmbeddingVector> u; // pretreatment
    std::optional<EmbeddingVector> v; // intervention
    std::optional<EmbeddingVector> o; // outcome
    double pretreatment_cosine = 0.0;
    double intervention_cosine = 0.0;
};

/// Why a candidate was dropped, or Kept.
enum class FilterOutcome {
    Kept,
    PretreatmentTooDissimilar,   // cosine(u_study, u_j) < threshold
    InterventionTooSimilar,      // cosine(v_j, treatment) >= threshold
    TreatmentInPretreatment,     // judge
    TreatmentInIntervention,     // judge
    TreatmentInOutcome,          // judge
    MalformedJudge,
    OverCapacity,                // passed every check but max_keep was reached
};

const char* filter_outcome_name(FilterOutcome outcome);

struct CandidateReport {
    std::string doc_id;
    std::size_t retrieval_rank = 0;
    double pretreatment_cosine = 0.0;
    std::optional<double> intervention_cosine;
    FilterOutcome outcome = FilterOutcome::Kept;
};

struct FilterResult {
    std::vector<ControlUnit> kept; // descending pretreatment cosine, then rank
    std::vector<CandidateReport> report; // one per candidate, input order
};

/// Keep candidates that pass every similarity/dissimilarity check, at most
/// cfg.max_keep of them. Candidate embeddings u and v are filled in.
FilterResult filter_controls(const StudyUnit& study, std::vector<ControlUnit> candidates,
                             const PipelineConfig& cfg, const JudgeProvider& judge,
                             const EmbeddingProvider& embedder, EmbeddingCache* cache);

enum class Label { Causal, NotCausal, Indeterminate };

const char* label_name(Label label);
Label parse_label(std::string_view name);

struct KeptDonorTrace {
    std::string doc_id;
    double cosine = 0.0;
    double weight = 0.0;
};

struct VerdictTrace {
    std::size_t retrieved = 0;
    std::vector<CandidateReport> candidates;
    std::vector<KeptDonorTrace> kept;
    std::optional<DonorWeights> weights;
    std::string synthetic_text;
    std::optional<SimilarityJudgement> judge_final;
    std::string note; // why the verdict is Indeterminate, when it is
};

struct CausalVerdict {
    Label label = Label::Indeterminate;
    std::optional<int> delta_hat; // 1 Causal, 0 NotCausal, absent otherwise
    VerdictTrace trace;
};

struct Providers {
    std::shared_ptr<const TextTransformProvider> transform;
    std::shared_ptr<const EmbeddingProvider> embedder;
    std::shared_ptr<EmbeddingCache> cache; // optional
    std::shared_ptr<const JudgeProvider> judge;
    std::shared_ptr<const InversionProvider> inverter;

    /// All-mock providers for hermetic runs.
    static Providers mock(std::size_t dim = 256, std::uint64_t seed = 0,
                          double judge_threshold = MockJudge::kDefaultThreshold);
};

/// What retrieval needs: documents, their index, and the preprocessing cache
/// (filled lazily for retrieved documents).
struct RetrievalContext {
    const Corpus& corpus;
    const Index& index;
    PreprocessedStore& store;
};

/// BM25 query for a study unit: anonymized pretreatment, treatment and
/// outcome, in order.
std::string study_query(const StudyUnit& study);

/// Retrieve, preprocess and segment donors for `study`, in retrieval order.
/// The study's own source document is never a donor.
std::vector<ControlUnit> retrieve_controls(const StudyUnit& study, const RetrievalContext& ctx,
                                           const PipelineConfig& cfg,
                                           const TextTransformProvider& transform,
                                           std::size_t* retrieved = nullptr);

CausalVerdict decide_causality(const StudyUnit& study, const RetrievalContext& ctx,
                               const PipelineConfig& cfg, const Providers& providers);

/// {story_id, treatment_idx, label, delta_hat, kept_donors, synthetic_text,
///  judge_final}
nlohmann::json manifest_record(const StudyUnit& study, const CausalVerdict& verdict);

/// manifest_record plus the full trace: candidate reports, fit
/// diagnostics and the Indeterminate note.
nlohmann::json verdict_json(const StudyUnit& study, const CausalVerdict& verdict);

void append_jsonl(const std::filesystem::path& path, const nlohmann::json& record);

} // namespace synthctl
