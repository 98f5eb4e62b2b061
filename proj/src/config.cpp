#include "synthctl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "synthctl/error.hpp"
#include "synthctl/live.hpp"

namespace synthctl {

const char* mode_name(Mode mode) { return mode == Mode::Mock ? "mock" : "live"; }

Mode parse_mode(std::string_view name) {
    if (name == "mock")
        return Mode::Mock;
    if (name == "live")
        return Mode::Live;
    throw Error(Stage::Config, "unknown mode '" + std::string(name) + "' (expected mock or live)");
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            throw Error(Stage::Config, "unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into) {
    if (!j.contains(key))
        return;
    try {
        into = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(Stage::Config, std::string("bad value for '") + key + "'");
    }
}

void read_path(const nlohmann::json& j, const char* key,
               std::optional<std::filesystem::path>& into) {
    if (j.contains(key))
        into = j.at(key).get<std::string>();
}

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw Error(Stage::Config, "config must be a JSON object");
    reject_unknown(j,
                   {"mode", "n", "max_keep", "min_keep", "cos_threshold", "lambda", "steps",
                    "beam_width", "parallelism", "seed", "indeterminate_policy", "paths",
                    "endpoints", "embedding_model", "mock"},
                   "config");
    RunConfig c;
    if (j.contains("mode"))
        c.mode = parse_mode(j["mode"].get<std::string>());
    read(j, "n", c.pipeline.n);
    read(j, "max_keep", c.pipeline.max_keep);
    read(j, "min_keep", c.pipeline.min_keep);
    read(j, "cos_threshold", c.pipeline.cos_threshold);
    read(j, "lambda", c.pipeline.lambda);
    read(j, "steps", c.pipeline.steps);
    read(j, "beam_width", c.pipeline.beam_width);
    read(j, "parallelism", c.parallelism);
    read(j, "seed", c.seed);
    read(j, "embedding_model", c.embedding_model);
    if (j.contains("indeterminate_policy")) {
        const auto p = j["indeterminate_policy"].get<std::string>();
        if (p == "as_negative")
            c.policy = IndeterminatePolicy::AsNegative;
        else if (p == "excluded")
            c.policy = IndeterminatePolicy::Excluded;
        else
            throw Error(Stage::Config, "unknown indeterminate_policy '" + p + "'");
    }
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        reject_unknown(p, {"corpus", "index", "cache", "embedding_cache", "dataset", "output"},
                       "paths");
        read_path(p, "corpus", c.corpus);
        read_path(p, "index", c.index);
        read_path(p, "cache", c.cache);
        read_path(p, "embedding_cache", c.embedding_cache);
        read_path(p, "dataset", c.dataset);
        read_path(p, "output", c.output);
    }
    if (j.contains("endpoints")) {
        const auto& e = j["endpoints"];
        reject_unknown(e, {"embed", "invert", "judge"}, "endpoints");
        read(e, "embed", c.embed_url);
        read(e, "invert", c.invert_url);
        read(e, "judge", c.judge_url);
    }
    if (j.contains("mock")) {
        const auto& m = j["mock"];
        reject_unknown(m, {"dim", "judge_threshold", "names"}, "mock");
        read(m, "dim", c.mock_dim);
        read(m, "judge_threshold", c.mock_judge_threshold);
        if (m.contains("names")) {
            MockTransformProvider::NameRoles names;
            for (const auto& [name, role] : m["names"].items())
                names.emplace_back(name, role.get<std::string>());
            c.mock_names = std::move(names);
        }
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Stage::Config, "cannot read config '" + path.string() + "'");
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Stage::Config, path.string() + ": " + e.what());
    }
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json paths = nlohmann::json::object();
    auto put = [&](const char* key, const std::optional<std::filesystem::path>& p) {
        if (p)
            paths[key] = p->string();
    };
    put("corpus", corpus);
    put("index", index);
    put("cache", cache);
    put("embedding_cache", embedding_cache);
    put("dataset", dataset);
    put("output", output);
    return {
        {"mode", mode_name(mode)},
        {"n", pipeline.n},
        {"max_keep", pipeline.max_keep},
        {"min_keep", pipeline.min_keep},
        {"cos_threshold", pipeline.cos_threshold},
        {"lambda", pipeline.lambda},
        {"steps", pipeline.steps},
        {"beam_width", pipeline.beam_width},
        {"parallelism", parallelism},
        {"seed", seed},
        {"indeterminate_policy", policy == IndeterminatePolicy::AsNegative ? "as_negative" : "excluded"},
        {"paths", paths},
        {"endpoints", {{"embed", embed_url}, {"invert", invert_url}, {"judge", judge_url}}},
        {"embedding_model", embedding_model},
        {"mock", {{"dim", mock_dim}, {"judge_threshold", mock_judge_threshold}}},
    };
}

void RunConfig::apply_environment() {
    if (embed_url.empty())
        embed_url = env("SYNTHCTL_EMBED_URL");
    if (invert_url.empty())
        invert_url = env("SYNTHCTL_INVERT_URL");
    if (judge_url.empty())
        judge_url = env("SYNTHCTL_JUDGE_URL");
    if (api_token.empty())
        api_token = env("SYNTHCTL_API_TOKEN");
}

void RunConfig::validate() const {
    pipeline.validate();
    if (parallelism < 1)
        throw Error(Stage::Config, "parallelism must be at least 1");
    if (mode == Mode::Live) {
        std::string missing;
        if (embed_url.empty())
            missing += " embed";
        if (invert_url.empty())
            missing += " invert";
        if (judge_url.empty())
            missing += " judge";
        if (!missing.empty())
            throw Error(Stage::Config, "live mode needs service endpoints; missing:" + missing);
    }
    if (mock_dim < 1)
        throw Error(Stage::Config, "mock.dim must be positive");
}

Providers make_providers(const RunConfig& cfg) {
    cfg.validate();
    Providers p;
    if (cfg.embedding_cache)
        p.cache = EmbeddingCache::open(*cfg.embedding_cache);
    else
        p.cache = std::make_shared<EmbeddingCache>();

    if (cfg.mode == Mode::Mock) {
        p.transform = cfg.mock_names ? std::make_shared<MockTransformProvider>(*cfg.mock_names)
                                     : std::make_shared<MockTransformProvider>();
        p.embedder = std::make_shared<MockEmbeddingProvider>(cfg.mock_dim, cfg.seed);
        p.judge = std::make_shared<MockJudge>(cfg.mock_judge_threshold);
        p.inverter = std::make_shared<MockInversionProvider>();
        return p;
    }

    auto endpoint = [&](const std::string& url) { return Endpoint{url, cfg.api_token}; };
    p.transform = std::make_shared<HttpTransformProvider>(endpoint(cfg.judge_url));
    p.embedder = std::make_shared<HttpEmbeddingProvider>(endpoint(cfg.embed_url), cfg.embedding_model);
    p.judge = std::make_shared<HttpJudgeProvider>(endpoint(cfg.judge_url));
    p.inverter = std::make_shared<HttpInversionProvider>(endpoint(cfg.invert_url));
    return p;
}

} // namespace synthctl
