#include "synthctl/judging.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "synthctl/error.hpp"
#include "synthctl/prompts.hpp"
#include "synthctl/text.hpp"

namespace synthctl {

std::string_view question_text(Question q) {
    switch (q) {
    case Question::SimilarEventWithin:
        return "does a similar event to event B take place in event A";
    case Question::SubsetOf:
        return "is event B a subset of event A";
    }
    return {};
}

std::string_view question_id(Question q) {
    return q == Question::SubsetOf ? "subset-of" : "similar-event-within";
}

namespace {

std::string_view strip_fence(std::string_view s) {
    auto open = s.find("```");
    if (open == std::string_view::npos)
        return s;
    auto body_start = s.find('\n', open);
    if (body_start == std::string_view::npos)
        return s;
    auto close = s.find("```", body_start);
    if (close == std::string_view::npos)
        return s.substr(body_start + 1);
    return s.substr(body_start + 1, close - body_start - 1);
}

std::set<std::string> content_set(std::string_view text) {
    auto tokens = content_tokens(text);
    return {tokens.begin(), tokens.end()};
}

} // namespace

JudgeResponse parse_judge_payload(std::string_view payload, Question q) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(strip_fence(payload));
    } catch (const nlohmann::json::parse_error&) {
        throw MalformedResponse("judge answer is not JSON: " + std::string(payload.substr(0, 200)));
    }
    if (!j.is_object() || !j.contains("is_similar"))
        throw MalformedResponse("judge answer lacks \"is_similar\"");

    JudgeResponse r;
    r.question = q;
    const auto& flag = j["is_similar"];
    if (flag.is_boolean()) {
        r.is_similar = flag.get<bool>();
    } else if (flag.is_string() && (flag == "true" || flag == "True")) {
        r.is_similar = true;
    } else if (flag.is_string() && (flag == "false" || flag == "False")) {
        r.is_similar = false;
    } else {
        throw MalformedResponse("judge answer has a non-boolean \"is_similar\"");
    }
    if (j.contains("reasoning")) {
        if (!j["reasoning"].is_string())
            throw MalformedResponse("judge answer has a non-string \"reasoning\"");
        r.reasoning = j["reasoning"].get<std::string>();
    }
    return r;
}

std::string render_similarity_prompt(std::string_view event_a, std::string_view event_b,
                                     Question q) {
    return prompts::fill(prompts::similarity_template(),
                         {{"event", std::string(event_a)},
                          {"test_event", std::string(event_b)},
                          {"question", std::string(question_text(q))}});
}

std::string render_counterfactual_prompt(const CounterfactualQuery& query) {
    if (query.story.size() != 5 || query.index < 1 || query.index > 4)
        throw Error(Stage::Judge, "counterfactual query needs five events and an index in 1..4");
    std::string story;
    for (std::size_t i = 0; i < query.story.size(); ++i) {
        if (i)
            story += ", ";
        story += "'" + query.story[i] + "'";
    }
    return prompts::fill(prompts::counterfactual_template(),
                         {{"story", story},
                          {"i", std::to_string(query.index)},
                          {"event 1", "'" + query.story[query.index - 1] + "'"},
                          {"event 2", "'" + query.story[4] + "'"}});
}

// ---------------------------------------------------------------------------

double MockJudge::overlap(std::string_view event_a, std::string_view event_b) {
    const auto a = content_set(event_a);
    const auto b = content_set(event_b);
    if (b.empty())
        return a.empty() ? 1.0 : 0.0;
    std::size_t shared = 0;
    for (const auto& t : b)
        shared += a.count(t);
    return static_cast<double>(shared) / static_cast<double>(b.size());
}

JudgeResponse MockJudge::ask(std::string_view event_a, std::string_view event_b,
                             Question q) const {
    const double ratio = overlap(event_a, event_b);
    JudgeResponse r;
    r.question = q;
    r.is_similar = ratio >= threshold_;
    r.reasoning = "content-token overlap " + std::to_string(ratio);
    return r;
}

CounterfactualAnswer MockJudge::counterfactual(const CounterfactualQuery& query) const {
    if (query.story.size() != 5 || query.index < 1 || query.index > 4)
        throw Error(Stage::Judge, "counterfactual query needs five events and an index in 1..4");
    const auto cause = content_set(query.story[query.index - 1]);
    const auto effect = content_set(query.story[4]);
    std::size_t shared = 0;
    for (const auto& t : effect)
        shared += cause.count(t);
    return {shared > 0, std::to_string(shared) + " shared content tokens"};
}

// ---------------------------------------------------------------------------

namespace {

JudgeResponse ask_with_reask(const JudgeProvider& provider, std::string_view a,
                             std::string_view b, Question q) {
    try {
        return provider.ask(a, b, q);
    } catch (const MalformedResponse&) {
        return provider.ask(a, b, q);
    }
}

} // namespace

SimilarityJudgement judge_similarity_detailed(const JudgeProvider& provider,
                                              std::string_view event_a,
                                              std::string_view event_b) {
    SimilarityJudgement out;
    out.responses[0] = ask_with_reask(provider, event_a, event_b, Question::SimilarEventWithin);
    out.responses[1] = ask_with_reask(provider, event_a, event_b, Question::SubsetOf);
    out.similar = out.responses[0].is_similar || out.responses[1].is_similar;
    return out;
}

bool judge_similarity(const JudgeProvider& provider, std::string_view event_a,
                      std::string_view event_b) {
    return judge_similarity_detailed(provider, event_a, event_b).similar;
}

} // namespace synthctl
