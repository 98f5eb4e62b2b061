#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthctl/cli.hpp"
#include "synthctl/config.hpp"
#include "synthctl/error.hpp"
#include "synthctl/evaluation.hpp"
#include "fixtures.hpp"

using namespace synthctl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

struct Workdir {
    fs::path dir;
    Workdir() {
        dir = fs::temp_directory_path() / "synthctl_test_cli";
        fs::remove_all(dir);
        fs::create_directories(dir);
        write_corpus(fixtures::causal_corpus().corpus, path("corpus.jsonl"));
        const auto ev = fixtures::garden_study().events;
        std::ofstream(path("study.json"))
            << json{{"story_id", "study-garden"}, {"events", ev}, {"treatment_idx", 3}}.dump();
        const std::vector<CopesSample> data = {
            {"study-garden", {ev[0], ev[1], "Mary went to the shop.", ev[2], ev[3]},
             {false, false, false, true}}};
        save_copes(path("copes.jsonl"), data);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("help lists every flag with its default") {
    const auto r = cli({"--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--config", "--mode", "--corpus", "--index", "--cache",
                             "--embedding-cache", "--dataset", "--study", "--out", "--n",
                             "--cos-threshold", "--lambda", "--steps", "--beam-width",
                             "--min-keep", "--max-keep", "--parallelism", "--seed"})
        CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
    for (const char* def : {"default 100", "default 0.8", "default 1.0", "default 10",
                            "default 4", "default 2", "default 5"})
        CHECK_MESSAGE(r.out.find(def) != std::string::npos, def);
}

TEST_CASE("ingest, index, run and invert-debug in mock mode") {
    Workdir w;
    auto r = cli({"ingest", "--corpus", w.path("corpus.jsonl"), "--out", w.path("cache.jsonl")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["documents"] == 11);
    r = cli({"ingest", "--corpus", w.path("corpus.jsonl"), "--out", w.path("cache.jsonl")});
    CHECK(json::parse(r.out)["preprocessed"] == 0);

    r = cli({"index", "--corpus", w.path("corpus.jsonl"), "--cache", w.path("cache.jsonl"),
             "--out", w.path("index.bin")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(w.path("index.bin")));

    r = cli({"run", "--corpus", w.path("corpus.jsonl"), "--cache", w.path("cache.jsonl"),
             "--index", w.path("index.bin"), "--study", w.path("study.json"), "--out",
             w.path("runs.jsonl")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["label"] == "Causal");
    const auto first_manifest = slurp(w.path("runs.jsonl"));

    // Indeterminate is still a successful run.
    r = cli({"run", "--corpus", w.path("corpus.jsonl"), "--study", w.path("study.json"),
             "--min-keep", "5"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["label"] == "Indeterminate");

    fs::remove(w.path("runs.jsonl"));
    cli({"run", "--corpus", w.path("corpus.jsonl"), "--cache", w.path("cache.jsonl"), "--index",
         w.path("index.bin"), "--study", w.path("study.json"), "--out", w.path("runs.jsonl")});
    CHECK(slurp(w.path("runs.jsonl")) == first_manifest);

    r = cli({"invert-debug", "--corpus", w.path("corpus.jsonl"), "--text",
             "a boy built a small wooden fence."});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["text"] == "a boy built a small wooden fence.");
}

TEST_CASE("eval writes a table row, a report and a resumable manifest") {
    Workdir w;
    auto r = cli({"eval", "--corpus", w.path("corpus.jsonl"), "--dataset", w.path("copes.jsonl"),
                  "--out", w.path("report.json"), "--parallelism", "2"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.rfind(" & Precision & Recall & F1\nSynthetic Control & ", 0) == 0);
    const auto report = json::parse(slurp(w.path("report.json")));
    CHECK(report["pairs"] == 4);
    CHECK(report["provider_mode"] == "mock");
    CHECK(fs::exists(w.path("report.json.manifest.jsonl")));

    r = cli({"eval", "--corpus", w.path("corpus.jsonl"), "--dataset", w.path("copes.jsonl"),
             "--out", w.path("report.json")});
    CHECK(r.err.find("4 resumed") != std::string::npos);

    r = cli({"eval", "--method", "counterfactual_prompting", "--dataset", w.path("copes.jsonl")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("Counterfactual & ") != std::string::npos);
}

TEST_CASE("errors exit non-zero with a message") {
    Workdir w;
    auto r = cli({"run", "--study", w.path("study.json")});
    CHECK(r.code == 1);
    CHECK(r.err.find("--corpus") != std::string::npos);
    r = cli({"run", "--corpus", w.path("corpus.jsonl"), "--study", w.path("study.json"),
             "--lambda", "-1"});
    CHECK(r.code == 1);
    r = cli({"bogus"});
    CHECK(r.code != 0);
    r = cli({"index", "--corpus", w.path("corpus.jsonl"), "--out", w.path("i.bin"), "--field", "x"});
    CHECK(r.code != 0);
    r = cli({"run", "--mode", "live", "--corpus", w.path("corpus.jsonl"), "--study",
             w.path("study.json")});
    CHECK(r.code == 1);
}

TEST_CASE("config files are strict and flags override them") {
    Workdir w;
    const auto cfg_path = w.path("cfg.json");
    std::ofstream(cfg_path) << json{{"min_keep", 5}, {"paths", {{"corpus", w.path("corpus.jsonl")}}}}.dump();
    auto r = cli({"run", "--config", cfg_path, "--study", w.path("study.json")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["label"] == "Indeterminate");
    r = cli({"run", "--config", cfg_path, "--min-keep", "2", "--study", w.path("study.json")});
    CHECK(json::parse(r.out)["label"] == "Causal");

    CHECK_THROWS_AS(RunConfig::from_json(json{{"min_kep", 2}}), Error);
    CHECK_THROWS_AS(RunConfig::from_json(json{{"mode", "remote"}}), Error);
    const auto c = RunConfig::from_json(json{{"lambda", 0.5}, {"mock", {{"dim", 32}}}});
    CHECK(c.pipeline.lambda == 0.5);
    CHECK(c.mock_dim == 32);
    CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());

    RunConfig live;
    live.mode = Mode::Live;
    live.embed_url = "http://a";
    CHECK_THROWS_AS(live.validate(), Error);
}
