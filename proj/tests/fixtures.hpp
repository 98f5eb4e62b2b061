#pragma once

// Mini-corpora built from the mock rules (bag-of-tokens embedding, 0.6
// content-overlap judge, nearest-registry inversion). Every study shares
// the garden story below; the donors decide the verdict.

#include <string>
#include <vector>

#include "synthctl/corpus.hpp"
#include "synthctl/pipeline.hpp"
#include "synthctl/retrieval.hpp"

namespace synthctl::fixtures {

inline EventSequence garden_study() {
    return {{"Mary planted seeds in the garden.",
             "Mary watered the seeds every morning.",
             "A storm flooded the garden.",
             "Mary felt sad about the ruined plants."},
            "study-garden"};
}

inline constexpr std::size_t kGardenTreatment = 3;

inline std::vector<std::pair<std::string, std::string>> bm25_documents() {
    return {
        {"d1", "The cat sat on the mat. The cat purred."},
        {"d2", "A dog chased the cat across the yard."},
        {"d3", "Birds sang in the garden while the dog slept in the sun all afternoon."},
        {"d4", "The garden was full of red roses and a small pond."},
        {"d5", "Rain fell on the roof and the cat hid under the bed."},
    };
}

inline std::vector<std::string> bm25_queries() {
    return {"cat",         "dog cat",     "garden roses", "the",          "cat cat",
            "pond bed sun", "zebra",      "rain roof cat", "purred mat sat", "dog garden yard"};
}

struct MiniCorpus {
    std::string name;
    Corpus corpus;
    Label expected;
};

inline std::vector<Document> distractors() {
    return {
        {"x-rocket", "The rocket flew to the moon. The crew looked at the stars. They landed "
                     "safely on a crater. Everyone cheered on the radio.", {}},
        {"x-bakery", "A baker made fresh bread. The oven was very hot. Customers lined up at "
                     "dawn. The shop sold out by noon.", {}},
        {"x-short", "Sam planted seeds in the garden. Sam watered them.", {}},
        {"x-ocean", "The whale swam across the ocean. It sang a long song. A ship passed by "
                    "slowly. The sailors waved at the whale.", {}},
    };
}

/// Donors whose outcomes never mention the ruined plants: the synthetic
/// outcome differs from the observed one, so the storm is causal.
inline MiniCorpus causal_corpus() {
    std::vector<Document> docs = {
        {"c01", "Mary planted seeds in the garden. Mary watered the seeds every morning. "
                "Mary went to visit her aunt. Mary picked a basket of red tomatoes.", {}},
        {"c02", "Tim planted seeds in the garden. Tim watered the seeds every day. "
                "Tim built a small wooden fence. Tim sold ripe tomatoes at the market.", {}},
        {"c03", "Lily planted flowers in the garden. Lily watered the flowers every morning. "
                "Lily painted the old shed blue. Lily gave fresh flowers to her mom.", {}},
        {"c04", "Ben planted seeds near the house. Ben fed his puppy every morning. "
                "Ben read comics on the porch. Ben shared sweet berries with friends.", {}},
        {"c05", "Anna planted a tree in the park. Anna walked her dog every evening. "
                "Anna baked a cherry pie. Anna won a ribbon at the fair.", {}},
        {"c06", "Mary planted seeds in the garden. Mary watered the seeds every morning. "
                "Mary read a book inside. A storm flooded the garden.", {}},
        {"study-garden", "Mary planted seeds in the garden. Mary watered the seeds every "
                         "morning. A storm flooded the garden. Mary felt sad about the ruined "
                         "plants.", {}},
    };
    for (auto& d : distractors())
        docs.push_back(std::move(d));
    return {"causal", Corpus(std::move(docs)), Label::Causal};
}

/// Donors whose plants are ruined anyway: the outcome happens without the
/// storm, so the storm is not the cause.
inline MiniCorpus not_causal_corpus() {
    std::vector<Document> docs = {
        {"n01", "Mary planted seeds in the garden. Mary watered the seeds every morning. "
                "Mary forgot them during a long trip. Mary felt sad about the ruined plants.", {}},
        {"n02", "Tim planted seeds in the garden. Tim watered the seeds every day. "
                "Hungry rabbits chewed every leaf. Tim felt sad about the ruined plants.", {}},
        {"n03", "Lily planted flowers in the garden. Lily watered the flowers every morning. "
                "Lily used the wrong fertilizer. Lily felt sad about the ruined plants.", {}},
        {"n04", "Jack planted seeds in the garden. Jack watered the seeds every week. "
                "A hot summer dried the soil. Jack felt sad about his ruined plants.", {}},
    };
    for (auto& d : distractors())
        docs.push_back(std::move(d));
    return {"not_causal", Corpus(std::move(docs)), Label::NotCausal};
}

/// Only one donor survives filtering.
inline MiniCorpus indeterminate_corpus() {
    std::vector<Document> docs = {
        {"i01", "Mary planted seeds in the garden. Mary watered the seeds every morning. "
                "Mary went to visit her aunt. Mary picked a basket of red tomatoes.", {}},
        // intervention is the treatment itself
        {"i02", "Mary planted seeds in the garden. Mary watered the seeds every morning. "
                "A storm flooded the garden. Mary moved her pots indoors.", {}},
        // treatment already in the pretreatment
        {"i03", "A storm flooded the garden. Lily planted seeds in the garden. "
                "Lily watered the seeds every morning. Lily bought new boots.", {}},
        // pretreatment too far from the study's
        {"i04", "Anna planted a tree in the park. Anna walked her dog every evening. "
                "Anna baked a cherry pie. Anna won a ribbon at the fair.", {}},
    };
    for (auto& d : distractors())
        docs.push_back(std::move(d));
    return {"indeterminate", Corpus(std::move(docs)), Label::Indeterminate};
}

/// Preprocessed corpus, anonymized index and providers for one fixture.
struct Harness {
    Corpus corpus;
    PreprocessedStore store;
    Index index;
    Providers providers;
    StudyUnit study;

    explicit Harness(const MiniCorpus& fx, Providers p = Providers::mock())
        : corpus(fx.corpus), providers(std::move(p)) {
        preprocess_corpus(corpus, *providers.transform, store);
        index = build_index(corpus, IndexField::Anonymized, &store);
        study = segment_study_unit(garden_study(), kGardenTreatment, *providers.transform);
    }

    CausalVerdict run(const PipelineConfig& cfg = {}) {
        return decide_causality(study, {corpus, index, store}, cfg, providers);
    }

    std::vector<std::string> kept_ids(const PipelineConfig& cfg = {}) {
        std::vector<std::string> ids;
        for (const auto& k : run(cfg).trace.kept)
            ids.push_back(k.doc_id);
        return ids;
    }
};

} // namespace synthctl::fixtures
