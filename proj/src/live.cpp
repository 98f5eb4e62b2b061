#include "synthctl/live.hpp"

#include <httplib.h>

#include "synthctl/error.hpp"
#include "synthctl/prompts.hpp"

namespace synthctl {

namespace {

httplib::Client make_client(const Endpoint& endpoint) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    if (!endpoint.token.empty())
        client.set_bearer_token_auth(endpoint.token);
    return client;
}

nlohmann::json decode(const httplib::Result& res, const std::string& what) {
    if (!res)
        throw std::runtime_error(what + ": " + httplib::to_string(res.error()));
    // the judge service answers 422 when the model output was unparseable
    if (res->status == 422)
        throw MalformedResponse(what + ": " + res->body.substr(0, 200));
    if (res->status < 200 || res->status >= 300)
        throw std::runtime_error(what + ": HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));
    return nlohmann::json::parse(res->body);
}

} // namespace

nlohmann::json post_json(const Endpoint& endpoint, const std::string& path,
                         const nlohmann::json& body) {
    auto client = make_client(endpoint);
    return decode(client.Post(path, body.dump(), "application/json"),
                  "POST " + endpoint.base_url + path);
}

nlohmann::json get_json(const Endpoint& endpoint, const std::string& path) {
    auto client = make_client(endpoint);
    return decode(client.Get(path), "GET " + endpoint.base_url + path);
}

// ---------------------------------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(Endpoint endpoint, std::string model,
                                             RetryPolicy retry)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), retry_(retry) {}

std::size_t HttpEmbeddingProvider::dim() const {
    std::call_once(dim_once_, [this] {
        const auto health = with_retries(Stage::Embed, retry_,
                                         [&] { return get_json(endpoint_, "/health"); });
        dim_ = health.at("dim").get<std::size_t>();
    });
    return dim_;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) const {
    nlohmann::json body{{"model", model_},
                        {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto reply = with_retries(Stage::Embed, retry_,
                                    [&] { return post_json(endpoint_, "/embed", body); });
    const auto dim = reply.at("dim").get<std::size_t>();
    const auto& vectors = reply.at("vectors");
    if (!vectors.is_array() || vectors.size() != texts.size())
        throw ProviderError(Stage::Embed, "embedding service returned " +
                                              std::to_string(vectors.size()) + " vectors for " +
                                              std::to_string(texts.size()) + " texts");
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        auto values = v.get<std::vector<double>>();
        if (values.size() != dim)
            throw ProviderError(Stage::Embed, "vector length disagrees with advertised dim");
        out.emplace_back(std::move(values), model_);
    }
    return out;
}

// ---------------------------------------------------------------------------

HttpInversionProvider::HttpInversionProvider(Endpoint endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {}

std::string HttpInversionProvider::invert(const EmbeddingVector& target,
                                          const InversionParams& params,
                                          std::span<const RegistryEntry>) const {
    nlohmann::json body{
        {"vector", std::vector<double>(target.values().begin(), target.values().end())},
        {"steps", params.steps},
        {"beam_width", params.beam_width}};
    const auto reply = with_retries(Stage::Invert, retry_,
                                    [&] { return post_json(endpoint_, "/invert", body); });
    return reply.at("text").get<std::string>();
}

// ---------------------------------------------------------------------------

HttpJudgeProvider::HttpJudgeProvider(Endpoint endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {}

JudgeResponse HttpJudgeProvider::ask(std::string_view event_a, std::string_view event_b,
                                     Question q) const {
    nlohmann::json body{{"event_a", event_a}, {"event_b", event_b}, {"question", question_text(q)}};
    const auto reply = with_retries(Stage::Judge, retry_,
                                    [&] { return post_json(endpoint_, "/judge", body); });
    return parse_judge_payload(reply.dump(), q);
}

CounterfactualAnswer HttpJudgeProvider::counterfactual(const CounterfactualQuery& query) const {
    nlohmann::json body{{"event_a", query.story.at(query.index - 1)},
                        {"event_b", query.story.at(4)},
                        {"question", render_counterfactual_prompt(query)}};
    const auto reply = with_retries(Stage::Judge, retry_,
                                    [&] { return post_json(endpoint_, "/judge", body); });
    const auto parsed = parse_judge_payload(reply.dump(), Question::SimilarEventWithin);
    return {parsed.is_similar, parsed.reasoning};
}

// ---------------------------------------------------------------------------

HttpTransformProvider::HttpTransformProvider(Endpoint endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {}

nlohmann::json HttpTransformProvider::call(std::string_view task, const std::string& prompt,
                                           Stage stage) const {
    nlohmann::json body{{"task", task}, {"prompt", prompt}};
    auto reply = with_retries(stage, retry_,
                              [&] { return post_json(endpoint_, "/transform", body); });
    if (!reply.is_object() || !reply.contains("result"))
        throw ProviderError(stage, "transform reply lacks \"result\"");
    return reply["result"];
}

std::string HttpTransformProvider::anonymize(std::string_view text) const {
    const auto prompt = prompts::fill(prompts::anonymize_template(), {{"event", std::string(text)}});
    const auto result = call("anonymize", prompt, Stage::Anonymize);
    if (!result.is_string())
        throw ProviderError(Stage::Anonymize, "anonymize result is not a string");
    return result.get<std::string>();
}

std::vector<std::string> HttpTransformProvider::summarize(std::string_view text) const {
    const auto prompt = prompts::fill(prompts::summarize_template(), {{"text", std::string(text)}});
    const auto result = call("summarize", prompt, Stage::Summarize);
    if (!result.is_array())
        throw ProviderError(Stage::Summarize, "summary result is not an array");
    return result.get<std::vector<std::string>>();
}

std::vector<std::string> HttpTransformProvider::augment(std::string_view treatment) const {
    const auto prompt =
        prompts::fill(prompts::augment_template(), {{"event", std::string(treatment)}});
    const auto result = call("augment", prompt, Stage::Augment);
    if (result.is_string())
        return {result.get<std::string>()};
    if (!result.is_array())
        throw ProviderError(Stage::Augment, "augment result is neither a string nor an array");
    return result.get<std::vector<std::string>>();
}

} // namespace synthctl
