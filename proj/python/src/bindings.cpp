#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "synthctl/cli.hpp"
#include "synthctl/error.hpp"
#include "synthctl/evaluation.hpp"
#include "synthctl/pipeline.hpp"
#include "synthctl/synthesis.hpp"
#include "synthctl/text.hpp"

namespace py = pybind11;
using namespace synthctl;

namespace {

EmbeddingVector to_vector(const std::vector<double>& v) { return EmbeddingVector(v, "python"); }

std::vector<EmbeddingVector> to_vectors(const std::vector<std::vector<double>>& m) {
    std::vector<EmbeddingVector> out;
    out.reserve(m.size());
    for (const auto& r : m)
        out.push_back(to_vector(r));
    return out;
}

std::vector<double> to_list(const EmbeddingVector& v) {
    return {v.values().begin(), v.values().end()};
}

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

IndeterminatePolicy parse_policy(const std::string& s) {
    if (s == "as_negative")
        return IndeterminatePolicy::AsNegative;
    if (s == "excluded")
        return IndeterminatePolicy::Excluded;
    throw Error(Stage::Config, "unknown indeterminate policy '" + s + "'");
}

// One-shot pipeline over an in-memory corpus with mock providers.
py::object decide_mock(const std::vector<std::pair<std::string, std::string>>& documents,
                       const std::vector<std::string>& events, std::size_t treatment_idx,
                       const std::string& story_id, const PipelineConfig& cfg, std::size_t dim,
                       std::uint64_t seed) {
    std::vector<Document> docs;
    for (const auto& [id, text] : documents)
        docs.push_back({id, text, {}});
    const Corpus corpus(std::move(docs));
    const auto providers = Providers::mock(dim, seed);
    PreprocessedStore store;
    preprocess_corpus(corpus, *providers.transform, store);
    const auto index = build_index(corpus, IndexField::Anonymized, &store);
    const auto study = segment_study_unit({events, story_id}, treatment_idx, *providers.transform);
    const auto verdict = decide_causality(study, {corpus, index, store}, cfg, providers);
    return to_python(verdict_json(study, verdict));
}

} // namespace

PYBIND11_MODULE(_synthctl, m) {
    m.doc() = "Event causality identification with synthetic control";

    static py::exception<Error> error(m, "SynthctlError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            error(e.what());
        }
    });

    m.def("tokenize", &tokenize, py::arg("text"));
    m.def("content_tokens", &content_tokens, py::arg("text"));

    m.def(
        "cosine",
        [](const std::vector<double>& a, const std::vector<double>& b) { return cosine(a, b); },
        py::arg("a"), py::arg("b"));

    m.def(
        "fit_weights",
        [](const std::vector<double>& u, const std::vector<std::vector<double>>& donors,
           double lam, std::vector<std::string> ids) {
            const auto w = fit_weights(to_vector(u), to_vectors(donors), lam, std::move(ids));
            py::dict d;
            d["w"] = w.w;
            d["lambda"] = w.lambda;
            d["residual_norm"] = w.residual_norm;
            d["donor_ids"] = w.donor_ids;
            d["weight_sum"] = w.weight_sum;
            d["min_weight"] = w.min_weight;
            return d;
        },
        py::arg("u_study"), py::arg("donors"), py::arg("lam") = 1.0,
        py::arg("donor_ids") = std::vector<std::string>{});

    m.def(
        "combine_outcomes",
        [](const std::vector<double>& w, const std::vector<std::vector<double>>& outcomes) {
            DonorWeights dw;
            dw.w = w;
            return to_list(combine_outcomes(dw, to_vectors(outcomes)));
        },
        py::arg("weights"), py::arg("outcomes"));

    py::class_<Index>(m, "Index")
        .def_static(
            "build",
            [](const std::vector<std::pair<std::string, std::string>>& docs, double k1, double b) {
                return Index::build(docs, {k1, b});
            },
            py::arg("documents"), py::arg("k1") = 1.2, py::arg("b") = 0.75)
        .def_static("load", &Index::load, py::arg("path"))
        .def("save", &Index::save, py::arg("path"))
        .def_property_readonly("document_count", &Index::document_count)
        .def_property_readonly("avg_doc_length", &Index::avg_doc_length)
        .def("idf", &Index::idf, py::arg("term"))
        .def(
            "score",
            [](const Index& idx, const std::string& query, const std::string& doc_id) {
                return bm25_score(idx, tokenize(query), doc_id);
            },
            py::arg("query"), py::arg("doc_id"))
        .def(
            "search",
            [](const Index& idx, const std::string& query, std::size_t n) {
                std::vector<std::pair<std::string, double>> out;
                for (auto& h : search(idx, query, n))
                    out.emplace_back(std::move(h.doc_id), h.score);
                return out;
            },
            py::arg("query"), py::arg("n"));

    py::class_<MockEmbeddingProvider>(m, "MockEmbedder")
        .def(py::init<std::size_t, std::uint64_t>(), py::arg("dim") = 256, py::arg("seed") = 0)
        .def_property_readonly("dim", &MockEmbeddingProvider::dim)
        .def_property_readonly("model_id", &MockEmbeddingProvider::model_id)
        .def("embed", [](const MockEmbeddingProvider& p, const std::vector<std::string>& texts) {
            std::vector<std::vector<double>> out;
            for (const auto& v : p.embed(texts))
                out.push_back(to_list(v));
            return out;
        });

    py::class_<MockJudge>(m, "MockJudge")
        .def(py::init<double>(), py::arg("threshold") = MockJudge::kDefaultThreshold)
        .def(
            "similar",
            [](const MockJudge& j, const std::string& a, const std::string& b) {
                return judge_similarity(j, a, b);
            },
            py::arg("event_a"), py::arg("event_b"))
        .def_static("overlap", &MockJudge::overlap, py::arg("event_a"), py::arg("event_b"));

    py::class_<MockTransformProvider>(m, "MockTransform")
        .def(py::init<>())
        .def("anonymize", &MockTransformProvider::anonymize, py::arg("text"))
        .def("summarize", &MockTransformProvider::summarize, py::arg("text"))
        .def("augment", &MockTransformProvider::augment, py::arg("treatment"));

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("n", &PipelineConfig::n)
        .def_readwrite("max_keep", &PipelineConfig::max_keep)
        .def_readwrite("min_keep", &PipelineConfig::min_keep)
        .def_readwrite("cos_threshold", &PipelineConfig::cos_threshold)
        .def_readwrite("lam", &PipelineConfig::lambda)
        .def_readwrite("steps", &PipelineConfig::steps)
        .def_readwrite("beam_width", &PipelineConfig::beam_width)
        .def("validate", &PipelineConfig::validate);

    m.def("decide_mock", &decide_mock, py::arg("documents"), py::arg("events"),
          py::arg("treatment_idx"), py::arg("story_id") = "", py::arg("config") = PipelineConfig{},
          py::arg("dim") = 256, py::arg("seed") = 0,
          "Run the full pipeline over an in-memory corpus with mock providers and return the "
          "verdict record.");

    m.def(
        "compute_metrics",
        [](const std::vector<std::string>& predictions, const std::vector<bool>& gold,
           const std::string& policy) {
            std::vector<Label> labels;
            for (const auto& p : predictions)
                labels.push_back(parse_label(p));
            std::unique_ptr<bool[]> g(new bool[gold.size()]);
            std::copy(gold.begin(), gold.end(), g.get());
            const auto r = compute_metrics(labels, std::span<const bool>(g.get(), gold.size()),
                                           parse_policy(policy));
            py::dict d;
            d["tp"] = r.tp;
            d["fp"] = r.fp;
            d["fn"] = r.fn;
            d["tn"] = r.tn;
            d["indeterminate"] = r.indeterminate_count;
            d["precision"] = r.precision;
            d["recall"] = r.recall;
            d["f1"] = r.f1;
            return d;
        },
        py::arg("predictions"), py::arg("gold"), py::arg("policy") = "as_negative");
    m.def("f1_score", &f1_score, py::arg("precision"), py::arg("recall"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_command(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a synthctl subcommand; returns (exit_code, stdout, stderr).");
}
