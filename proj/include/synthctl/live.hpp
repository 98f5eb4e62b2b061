#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "synthctl/corpus.hpp"
#include "synthctl/embedding.hpp"
#include "synthctl/inversion.hpp"
#include "synthctl/judging.hpp"
#include "synthctl/retry.hpp"

namespace synthctl {

/// Base URL ("http://host:port") plus optional bearer token.
struct Endpoint {
    std::string base_url;
    std::string token;
    std::chrono::seconds timeout{60};
};

/// POST a JSON body to `endpoint.base_url + path` and parse the JSON reply.
/// Non-2xx statuses and transport errors throw; retries are the caller's.
nlohmann::json post_json(const Endpoint& endpoint, const std::string& path,
                         const nlohmann::json& body);
nlohmann::json get_json(const Endpoint& endpoint, const std::string& path);

/// POST /embed {"model", "texts"} -> {"dim", "vectors"}
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(Endpoint endpoint, std::string model, RetryPolicy retry = {});

    std::string model_id() const override { return model_; }
    /// From GET /health, fetched once.
    std::size_t dim() const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

private:
    Endpoint endpoint_;
    std::string model_;
    RetryPolicy retry_;
    mutable std::once_flag dim_once_;
    mutable std::size_t dim_ = 0;
};

/// POST /invert {"vector", "steps", "beam_width"} -> {"text"}
class HttpInversionProvider final : public InversionProvider {
public:
    explicit HttpInversionProvider(Endpoint endpoint, RetryPolicy retry = {});

    std::string invert(const EmbeddingVector& target, const InversionParams& params,
                       std::span<const RegistryEntry> donor_outcomes) const override;

private:
    Endpoint endpoint_;
    RetryPolicy retry_;
};

/// POST /judge {"event_a", "event_b", "question"} -> {"is_similar", "reasoning"}
///
/// The counterfactual baseline goes through the same route with the filled
/// counterfactual prompt as "question"; is_similar carries the yes/no.
class HttpJudgeProvider final : public JudgeProvider {
public:
    explicit HttpJudgeProvider(Endpoint endpoint, RetryPolicy retry = {});

    JudgeResponse ask(std::string_view event_a, std::string_view event_b,
                      Question q) const override;
    CounterfactualAnswer counterfactual(const CounterfactualQuery& query) const override;

private:
    Endpoint endpoint_;
    RetryPolicy retry_;
};

/// POST /transform {"task": "anonymize"|"summarize"|"augment", "prompt"}
/// -> {"result": string | [string]}
class HttpTransformProvider final : public TextTransformProvider {
public:
    explicit HttpTransformProvider(Endpoint endpoint, RetryPolicy retry = {});

    std::string anonymize(std::string_view text) const override;
    std::vector<std::string> summarize(std::string_view text) const override;
    std::vector<std::string> augment(std::string_view treatment) const override;
    bool deterministic() const override { return true; }

private:
    nlohmann::json call(std::string_view task, const std::string& prompt, Stage stage) const;

    Endpoint endpoint_;
    RetryPolicy retry_;
};

} // namespace synthctl
