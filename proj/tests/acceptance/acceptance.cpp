// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "synthctl/cli.hpp"
#include "synthctl/evaluation.hpp"
#include "synthctl/synthesis.hpp"
#include "synthctl/text.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace synthctl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kRidgeRelTol = 1e-9;
constexpr double kRidgeTimeLimit = 1.0;   // seconds, all 100 instances
constexpr double kShrinkSlack = 1e-12;
constexpr double kScalarTol = 1e-12;
constexpr double kBm25Tol = 1e-9;
constexpr double kMetricTol = 1e-4;
constexpr double kEndToEndTimeLimit = 5.0; // seconds, three corpora twice

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

std::vector<EmbeddingVector> evs(const oracle::Matrix& m) {
    std::vector<EmbeddingVector> out;
    for (const auto& r : m)
        out.emplace_back(r, "acceptance");
    return out;
}

std::string fmt(const char* f, double a, double b = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

Outcome ridge_matches_oracle() {
    oracle::Gen gen(20240601);
    const double lambdas[] = {0.01, 0.1, 1, 10};
    double worst = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < 100; ++i) {
        const auto j = gen.size(1, 5);
        const auto dim = gen.size(2, 16);
        const double lambda = lambdas[gen.size(0, 3)];
        const auto u = gen.vec(dim);
        oracle::Matrix g;
        for (std::size_t k = 0; k < j; ++k)
            g.push_back(gen.vec(dim));
        const auto got = fit_weights(EmbeddingVector(u, "acceptance"), evs(g), lambda).w;
        const auto ref = oracle::ridge(u, g, lambda);
        std::vector<double> diff(j);
        for (std::size_t k = 0; k < j; ++k)
            diff[k] = got[k] - ref[k];
        worst = std::max(worst, norm(diff) / norm(ref));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= kRidgeRelTol && elapsed < kRidgeTimeLimit,
            fmt("max relative error %.2e, %.3f s", worst, elapsed)};
}

Outcome shrinkage() {
    oracle::Gen gen(777);
    const double grid[] = {0, 0.1, 1, 10, 100};
    int violations = 0;
    for (int i = 0; i < 20; ++i) {
        const auto dim = gen.size(2, 16);
        const auto j = gen.size(1, std::min<std::size_t>(5, dim));
        const auto u = gen.vec(dim);
        oracle::Matrix g;
        for (std::size_t k = 0; k < j; ++k)
            g.push_back(gen.vec(dim));
        double prev_w = INFINITY, prev_r = -INFINITY;
        for (double lambda : grid) {
            const auto fit = fit_weights(EmbeddingVector(u, "acceptance"), evs(g), lambda);
            const double wn = norm(fit.w);
            if (wn > prev_w + kShrinkSlack || fit.residual_norm < prev_r - kShrinkSlack)
                ++violations;
            prev_w = wn;
            prev_r = fit.residual_norm;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations over 20 instances"};
}

Outcome scalar_case() {
    const std::vector<double> u = {0.48, 0.6, 0.64};
    const EmbeddingVector study(u, "acceptance");
    const std::vector<EmbeddingVector> donors = {study};
    const double w = fit_weights(study, donors, 1.0).w.at(0);
    return {std::fabs(w - 0.5) <= kScalarTol, fmt("w1 = %.17g", w)};
}

Outcome bm25_oracle() {
    const auto docs = fixtures::bm25_documents();
    const auto idx = Index::build(docs);
    oracle::Bm25 ref;
    for (const auto& [id, text] : docs)
        ref.docs[id] = oracle::words(text);
    double worst = 0;
    for (const auto& q : fixtures::bm25_queries()) {
        const auto terms = tokenize(q);
        for (const auto& [id, _] : docs)
            worst = std::max(worst, std::fabs(bm25_score(idx, terms, id) - ref.score(terms, id)));
    }
    bool search_ok = true;
    std::string why;
    for (const auto& q : fixtures::bm25_queries()) {
        const auto terms = tokenize(q);
        std::vector<std::pair<double, std::string>> expected;
        for (const auto& [id, _] : docs) {
            const double s = ref.score(terms, id);
            if (s > 0)
                expected.push_back({-s, id});
        }
        std::sort(expected.begin(), expected.end());
        for (std::size_t n = 1; n <= 6; ++n) {
            const auto hits = search(idx, q, n);
            const auto want = std::min(n, expected.size());
            if (hits.size() != want) {
                search_ok = false;
                why = "size mismatch for '" + q + "'";
                continue;
            }
            for (std::size_t k = 0; k < want; ++k) {
                if (hits[k].doc_id != expected[k].second || hits[k].score <= 0) {
                    search_ok = false;
                    why = "order mismatch for '" + q + "'";
                }
            }
        }
    }
    const std::vector<Index::Entry> twins = {{"b", "apple pie"}, {"a", "apple pie"}, {"c", "pear"}};
    const auto tie = search(Index::build(twins), "apple", 1);
    if (tie.size() != 1 || tie[0].doc_id != "a") {
        search_ok = false;
        why = "tie not broken by ascending id";
    }
    return {worst <= kBm25Tol && search_ok,
            fmt("max abs error %.2e", worst) + (search_ok ? ", search rules hold" : ", " + why)};
}

Outcome metric_arithmetic() {
    const double f1_reported = f1_score(0.2663, 0.75);
    const std::vector<Label> p = {Label::Causal, Label::Causal, Label::Causal, Label::Causal,
                                  Label::Causal, Label::Causal, Label::Causal, Label::Causal,
                                  Label::NotCausal};
    const bool g[] = {true, true, true, false, false, false, false, false, true};
    const auto m = compute_metrics(p, g);
    const bool ok = std::fabs(f1_reported - 0.3930) <= kMetricTol && m.tp == 3 && m.fp == 5 &&
                    m.fn == 1 && std::fabs(m.precision - 0.375) <= 1e-12 &&
                    std::fabs(m.recall - 0.75) <= 1e-12 && std::fabs(m.f1 - 0.5) <= 1e-12;
    return {ok, fmt("F1(0.2663, 0.75) = %.4f; tp3/fp5/fn1 -> F1 %.4f", f1_reported, m.f1)};
}

std::string manifest_bytes(const fixtures::MiniCorpus& fx, const fs::path& path, Label& label) {
    fs::remove(path);
    fixtures::Harness h(fx);
    const auto verdict = h.run();
    label = verdict.label;
    append_jsonl(path, manifest_record(h.study, verdict));
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome end_to_end(const fs::path& dir) {
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = true;
    for (const auto& fx : {fixtures::causal_corpus(), fixtures::not_causal_corpus(),
                           fixtures::indeterminate_corpus()}) {
        if (fx.corpus.size() > 20)
            ok = false;
        Label first{}, second{};
        const auto a = manifest_bytes(fx, dir / (fx.name + "-1.jsonl"), first);
        const auto b = manifest_bytes(fx, dir / (fx.name + "-2.jsonl"), second);
        const bool good = first == fx.expected && second == fx.expected && a == b && !a.empty();
        ok = ok && good;
        detail += fx.name + "->" + label_name(first) + (a == b ? " (identical)" : " (DIFFERS)") + "; ";
    }
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < kEndToEndTimeLimit;
    return {ok, detail + fmt("%.3f s", elapsed)};
}

Outcome filter_monotonicity() {
    bool ok = true;
    std::string detail;
    for (const auto& fx : {fixtures::causal_corpus(), fixtures::not_causal_corpus(),
                           fixtures::indeterminate_corpus()}) {
        fixtures::Harness h(fx);
        std::vector<std::string> prev;
        bool first = true;
        detail += fx.name + " [";
        for (double t : {0.6, 0.7, 0.8, 0.9}) {
            PipelineConfig cfg;
            cfg.cos_threshold = t;
            const auto ids = h.kept_ids(cfg);
            if (!first) {
                const std::set<std::string> p(prev.begin(), prev.end());
                for (const auto& id : ids)
                    ok = ok && p.count(id) > 0;
            }
            detail += std::to_string(ids.size()) + (t < 0.85 ? " " : "");
            prev = ids;
            first = false;
        }
        detail += "]; ";
    }
    detail.resize(detail.size() - 2);
    return {ok, "kept counts at 0.6..0.9: " + detail};
}

Outcome eval_report(const fs::path& dir) {
    const auto corpus = dir / "corpus.jsonl";
    const auto dataset = dir / "copes.jsonl";
    const auto report = dir / "report.json";
    fs::remove(report);
    fs::remove(dir / "report.json.manifest.jsonl");
    write_corpus(fixtures::causal_corpus().corpus, corpus);
    const auto ev = fixtures::garden_study().events;
    const std::vector<CopesSample> data = {
        {"study-garden", {ev[0], ev[1], "Mary went to the shop.", ev[2], ev[3]},
         {false, false, false, true}},
        {"s-other", {"Tim planted seeds in the garden.", "Tim watered the seeds every day.",
                     "Tim built a small wooden fence.", "A dog dug under the fence.",
                     "Tim sold ripe tomatoes at the market."},
         {true, false, false, false}},
    };
    save_copes(dataset, data);
    std::ostringstream out, err;
    const int code = run_command({"eval", "--corpus", corpus.string(), "--dataset",
                                  dataset.string(), "--out", report.string()},
                                 out, err);
    if (code != 0)
        return {false, "eval exited " + std::to_string(code) + ": " + err.str()};
    const std::regex shape(R"( & Precision & Recall & F1\nSynthetic Control & \d\.\d{4} & \d\.\d{4} & \d\.\d{4}\n)");
    const bool shaped = std::regex_match(out.str(), shape);
    std::ifstream in(report);
    const auto j = nlohmann::json::parse(in);
    const bool complete = j.at("pairs") == 8 && j.at("records").size() == 8 &&
                          j.contains("precision") && j.contains("recall") && j.contains("f1");
    auto row = out.str();
    row = row.substr(row.find('\n') + 1);
    row.pop_back();
    return {shaped && complete, "\"" + row + "\", 8 pairs"};
}

} // namespace

int main() {
    const auto dir = fs::temp_directory_path() / "synthctl_acceptance";
    fs::create_directories(dir);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"ridge solver matches normal-equations oracle", ridge_matches_oracle},
        {"shrinkage in lambda", shrinkage},
        {"closed-form scalar case", scalar_case},
        {"bm25 oracle equivalence and search rules", bm25_oracle},
        {"metric arithmetic", metric_arithmetic},
        {"end-to-end mock determinism", [&] { return end_to_end(dir); }},
        {"filter monotonicity", filter_monotonicity},
        {"eval harness report shape", [&] { return eval_report(dir); }},
    };

    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %-46s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
