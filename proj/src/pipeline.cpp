#include "synthctl/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "synthctl/error.hpp"
#include "synthctl/text.hpp"

namespace synthctl {

void PipelineConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(Stage::Config, msg); };
    if (n < 1)
        fail("retrieval size n must be at least 1");
    if (min_keep < 1)
        fail("min_keep must be at least 1");
    if (max_keep < min_keep)
        fail("max_keep must be at least min_keep");
    if (!(cos_threshold >= -1.0 && cos_threshold <= 1.0))
        fail("cos_threshold must lie in [-1, 1]");
    if (!(lambda >= 0.0))
        fail("lambda must be non-negative");
    if (steps < 1 || beam_width < 1)
        fail("steps and beam_width must be at least 1");
}

// ---------------------------------------------------------------------------
// Segmentation

StudyUnit segment_study_unit(const EventSequence& events, std::size_t treatment_idx,
                             const TextTransformProvider& provider) {
    const auto& ev = events.events;
    if (ev.size() < 2)
        throw Error(Stage::Segment, "a study unit needs at least two events");
    if (treatment_idx < 1 || treatment_idx > ev.size())
        throw Error(Stage::Segment, "treatment index " + std::to_string(treatment_idx) +
                                        " is outside 1.." + std::to_string(ev.size()));
    if (treatment_idx == ev.size())
        throw Error(Stage::Segment, "treatment index " + std::to_string(treatment_idx) +
                                        " points at the outcome");

    StudyUnit unit;
    unit.story_id = events.source_id;
    unit.source_events = ev;
    unit.treatment_idx = treatment_idx;
    unit.treatment = ev[treatment_idx - 1];
    unit.outcome = ev.back();
    unit.pretreatment.assign(ev.begin(), ev.begin() + static_cast<std::ptrdiff_t>(treatment_idx - 1));
    if (unit.pretreatment.empty()) {
        unit.pretreatment = augment_context(unit.treatment, treatment_idx, provider).events;
        unit.augmented_context = true;
    }

    for (const auto& e : unit.pretreatment)
        unit.anon_pretreatment.push_back(anonymize(e, provider));
    unit.anon_treatment = anonymize(unit.treatment, provider);
    unit.anon_outcome = anonymize(unit.outcome, provider);
    return unit;
}

std::optional<SegmentTexts> segment_control(const std::vector<std::string>& summary,
                                            std::size_t t) {
    const auto m = summary.size();
    if (m < 3)
        return std::nullopt;
    const auto k = std::max<std::size_t>(1, std::min(t, m - 2));
    auto slice = [&](std::size_t from, std::size_t to) {
        return std::vector<std::string>(summary.begin() + static_cast<std::ptrdiff_t>(from),
                                        summary.begin() + static_cast<std::ptrdiff_t>(to));
    };
    SegmentTexts seg{join_events(slice(0, k)), trim(summary[k]), join_events(slice(k + 1, m))};
    if (seg.pretreatment.empty() || seg.intervention.empty() || seg.outcome.empty())
        return std::nullopt;
    return seg;
}

// ---------------------------------------------------------------------------
// Filtering

const char* filter_outcome_name(FilterOutcome outcome) {
    switch (outcome) {
    case FilterOutcome::Kept: return "kept";
    case FilterOutcome::PretreatmentTooDissimilar: return "pretreatment_too_dissimilar";
    case FilterOutcome::InterventionTooSimilar: return "intervention_too_similar";
    case FilterOutcome::TreatmentInPretreatment: return "treatment_in_pretreatment";
    case FilterOutcome::TreatmentInIntervention: return "treatment_in_intervention";
    case FilterOutcome::TreatmentInOutcome: return "treatment_in_outcome";
    case FilterOutcome::MalformedJudge: return "malformed_judge";
    case FilterOutcome::OverCapacity: return "over_capacity";
    }
    return "unknown";
}

namespace {

std::vector<std::string> pluck(const std::vector<ControlUnit>& units,
                               std::string SegmentTexts::*field) {
    std::vector<std::string> out;
    out.reserve(units.size());
    for (const auto& u : units)
        out.push_back(u.anonymized.*field);
    return out;
}

} // namespace

FilterResult filter_controls(const StudyUnit& study, std::vector<ControlUnit> candidates,
                             const PipelineConfig& cfg, const JudgeProvider& judge,
                             const EmbeddingProvider& embedder, EmbeddingCache* cache) {
    FilterResult result;
    result.report.resize(candidates.size());
    if (candidates.empty())
        return result;

    const auto u_study = embed_one(embedder, cache, join_events(study.anon_pretreatment));
    const auto treatment = embed_one(embedder, cache, study.anon_treatment);

    // (a) pretreatment similarity, (b) treatment dissimilarity
    auto u = embed(embedder, cache, pluck(candidates, &SegmentTexts::pretreatment));
    auto v = embed(embedder, cache, pluck(candidates, &SegmentTexts::intervention));

    std::vector<std::size_t> passed;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& c = candidates[i];
        auto& rep = result.report[i];
        rep.doc_id = c.doc_id;
        rep.retrieval_rank = c.retrieval_rank;
        c.u = std::move(u[i]);
        c.v = std::move(v[i]);
        c.pretreatment_cosine = cosine(u_study, *c.u);
        c.intervention_cosine = cosine(*c.v, treatment);
        rep.pretreatment_cosine = c.pretreatment_cosine;
        rep.intervention_cosine = c.intervention_cosine;

        if (c.pretreatment_cosine < cfg.cos_threshold) {
            rep.outcome = FilterOutcome::PretreatmentTooDissimilar;
            continue;
        }
        if (c.intervention_cosine >= cfg.cos_threshold) {
            rep.outcome = FilterOutcome::InterventionTooSimilar;
            continue;
        }

        // (c)-(e): the study treatment must not show up in any donor segment.
        // Unanonymized text on both sides; donor segment is event A.
        try {
            if (judge_similarity(judge, c.raw.pretreatment, study.treatment))
                rep.outcome = FilterOutcome::TreatmentInPretreatment;
            else if (judge_similarity(judge, c.raw.intervention, study.treatment))
                rep.outcome = FilterOutcome::TreatmentInIntervention;
            else if (judge_similarity(judge, c.raw.outcome, study.treatment))
                rep.outcome = FilterOutcome::TreatmentInOutcome;
        } catch (const MalformedResponse&) {
            rep.outcome = FilterOutcome::MalformedJudge;
        }
        if (rep.outcome == FilterOutcome::Kept)
            passed.push_back(i);
    }

    std::stable_sort(passed.begin(), passed.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = candidates[a];
        const auto& cb = candidates[b];
        if (ca.pretreatment_cosine != cb.pretreatment_cosine)
            return ca.pretreatment_cosine > cb.pretreatment_cosine;
        return ca.retrieval_rank < cb.retrieval_rank;
    });
    for (std::size_t pos = 0; pos < passed.size(); ++pos) {
        if (pos < cfg.max_keep)
            result.kept.push_back(std::move(candidates[passed[pos]]));
        else
            result.report[passed[pos]].outcome = FilterOutcome::OverCapacity;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Verdict

const char* label_name(Label label) {
    switch (label) {
    case Label::Causal: return "Causal";
    case Label::NotCausal: return "NotCausal";
    case Label::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

Label parse_label(std::string_view name) {
    if (name == "Causal")
        return Label::Causal;
    if (name == "NotCausal")
        return Label::NotCausal;
    if (name == "Indeterminate")
        return Label::Indeterminate;
    throw Error(Stage::Evaluate, "unknown label '" + std::string(name) + "'");
}

Providers Providers::mock(std::size_t dim, std::uint64_t seed, double judge_threshold) {
    Providers p;
    p.transform = std::make_shared<MockTransformProvider>();
    p.embedder = std::make_shared<MockEmbeddingProvider>(dim, seed);
    p.cache = std::make_shared<EmbeddingCache>();
    p.judge = std::make_shared<MockJudge>(judge_threshold);
    p.inverter = std::make_shared<MockInversionProvider>();
    return p;
}

std::string study_query(const StudyUnit& study) {
    std::vector<std::string> parts = study.anon_pretreatment;
    parts.push_back(study.anon_treatment);
    parts.push_back(study.anon_outcome);
    return join_events(parts);
}

std::vector<ControlUnit> retrieve_controls(const StudyUnit& study, const RetrievalContext& ctx,
                                           const PipelineConfig& cfg,
                                           const TextTransformProvider& transform,
                                           std::size_t* retrieved) {
    const auto hits = ctx.index.search(study_query(study), cfg.n);
    if (retrieved)
        *retrieved = hits.size();

    const auto t = study.pretreatment.size();
    std::vector<ControlUnit> units;
    for (std::size_t rank = 0; rank < hits.size(); ++rank) {
        const auto& hit = hits[rank];
        if (!study.story_id.empty() && hit.doc_id == study.story_id)
            continue;
        const auto* doc = ctx.corpus.find(hit.doc_id);
        if (!doc)
            throw Error(Stage::Retrieve,
                        "index returned '" + hit.doc_id + "', which is not in the corpus");
        const auto pre = ctx.store.get_or_compute(*doc, transform);
        auto raw = segment_control(pre.raw_events, t);
        auto anon = segment_control(pre.events, t);
        if (!raw || !anon)
            continue; // fewer than three events
        ControlUnit unit;
        unit.doc_id = hit.doc_id;
        unit.retrieval_rank = rank;
        unit.raw = std::move(*raw);
        unit.anonymized = std::move(*anon);
        units.push_back(std::move(unit));
    }
    return units;
}

CausalVerdict decide_causality(const StudyUnit& study, const RetrievalContext& ctx,
                               const PipelineConfig& cfg, const Providers& providers) {
    cfg.validate();
    if (!providers.transform || !providers.embedder || !providers.judge || !providers.inverter)
        throw Error(Stage::Config, "every provider must be set");
    auto* cache = providers.cache.get();

    CausalVerdict verdict;
    auto& trace = verdict.trace;

    auto candidates = retrieve_controls(study, ctx, cfg, *providers.transform, &trace.retrieved);
    auto filtered = filter_controls(study, std::move(candidates), cfg, *providers.judge,
                                    *providers.embedder, cache);
    trace.candidates = std::move(filtered.report);
    auto& kept = filtered.kept;

    for (const auto& c : kept)
        trace.kept.push_back({c.doc_id, c.pretreatment_cosine, 0.0});

    if (kept.size() < cfg.min_keep) {
        trace.note = "kept " + std::to_string(kept.size()) + " donor(s), need at least " +
                     std::to_string(cfg.min_keep);
        return verdict;
    }

    const auto u_study = embed_one(*providers.embedder, cache, join_events(study.anon_pretreatment));
    std::vector<EmbeddingVector> donors;
    std::vector<std::string> ids;
    std::vector<std::string> outcome_texts;
    for (const auto& c : kept) {
        donors.push_back(*c.u);
        ids.push_back(c.doc_id);
        outcome_texts.push_back(c.anonymized.outcome);
    }
    auto outcomes = embed(*providers.embedder, cache, outcome_texts);

    auto weights = fit_weights(u_study, donors, cfg.lambda, ids);
    for (std::size_t j = 0; j < kept.size(); ++j)
        trace.kept[j].weight = weights.w[j];
    const auto synthetic = combine_outcomes(weights, outcomes);
    trace.weights = std::move(weights);

    std::vector<RegistryEntry> registry;
    for (std::size_t j = 0; j < kept.size(); ++j)
        registry.push_back({outcome_texts[j], outcomes[j]});
    trace.synthetic_text = invert(*providers.inverter, synthetic,
                                  {cfg.steps, cfg.beam_width}, registry);

    try {
        // Event A is the synthetic outcome, event B the observed one.
        trace.judge_final =
            judge_similarity_detailed(*providers.judge, trace.synthetic_text, study.outcome);
    } catch (const MalformedResponse& e) {
        trace.note = std::string("final judgment malformed: ") + e.what();
        return verdict;
    }

    // Outcome still happens without the treatment: no change in likelihood.
    if (trace.judge_final->similar) {
        verdict.label = Label::NotCausal;
        verdict.delta_hat = 0;
    } else {
        verdict.label = Label::Causal;
        verdict.delta_hat = 1;
    }
    return verdict;
}

nlohmann::json manifest_record(const StudyUnit& study, const CausalVerdict& verdict) {
    nlohmann::json kept = nlohmann::json::array();
    for (const auto& d : verdict.trace.kept)
        kept.push_back({{"doc_id", d.doc_id}, {"cosine", d.cosine}, {"weight", d.weight}});

    nlohmann::json judge_final = nullptr;
    if (const auto& j = verdict.trace.judge_final) {
        const auto& decisive =
            (!j->responses[0].is_similar && j->responses[1].is_similar) ? j->responses[1]
                                                                         : j->responses[0];
        judge_final = {{"is_similar", j->similar}, {"reasoning", decisive.reasoning}};
    }
    return {
        {"story_id", study.story_id},
        {"treatment_idx", study.treatment_idx},
        {"label", label_name(verdict.label)},
        {"delta_hat", verdict.delta_hat ? nlohmann::json(*verdict.delta_hat) : nlohmann::json()},
        {"kept_donors", std::move(kept)},
        {"synthetic_text", verdict.trace.synthetic_text},
        {"judge_final", std::move(judge_final)},
    };
}

nlohmann::json verdict_json(const StudyUnit& study, const CausalVerdict& verdict) {
    auto j = manifest_record(study, verdict);
    const auto& trace = verdict.trace;
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : trace.candidates) {
        candidates.push_back({
            {"doc_id", c.doc_id},
            {"rank", c.retrieval_rank},
            {"pretreatment_cosine", c.pretreatment_cosine},
            {"intervention_cosine",
             c.intervention_cosine ? nlohmann::json(*c.intervention_cosine) : nlohmann::json()},
            {"outcome", filter_outcome_name(c.outcome)},
        });
    }
    nlohmann::json weights = nullptr;
    if (trace.weights) {
        weights = {{"w", trace.weights->w},
                   {"lambda", trace.weights->lambda},
                   {"residual_norm", trace.weights->residual_norm},
                   {"weight_sum", trace.weights->weight_sum},
                   {"min_weight", trace.weights->min_weight}};
    }
    j["trace"] = {
        {"retrieved", trace.retrieved},
        {"augmented_context", study.augmented_context},
        {"candidates", std::move(candidates)},
        {"weights", std::move(weights)},
        {"note", trace.note},
    };
    return j;
}

void append_jsonl(const std::filesystem::path& path, const nlohmann::json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out)
        throw Error(Stage::Evaluate, "cannot append to '" + path.string() + "'");
    out << record.dump() << '\n';
}

} // namespace synthctl
