#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace synthctl {

/// The two directional questions asked about (event A, event B). Event A is
/// the candidate side, event B the study-unit side.
enum class Question { SimilarEventWithin, SubsetOf };

std::string_view question_text(Question q);
std::string_view question_id(Question q);

struct JudgeResponse {
    bool is_similar = false;
    std::string reasoning;
    Question question = Question::SimilarEventWithin;
};

/// Parse a model answer holding `is_similar` and `reasoning`. Accepts a bare
/// JSON object or one wrapped in a ``` fence; `is_similar` may be a boolean
/// or the strings "true"/"false". Throws MalformedResponse otherwise.
JudgeResponse parse_judge_payload(std::string_view payload, Question q);

std::string render_similarity_prompt(std::string_view event_a, std::string_view event_b,
                                     Question q);

/// A story of five events and the 1-based index of the candidate cause; the
/// effect is always the fifth event.
struct CounterfactualQuery {
    std::vector<std::string> story;
    std::size_t index = 1;
};

struct CounterfactualAnswer {
    bool causal = false;
    std::string reasoning;
};

std::string render_counterfactual_prompt(const CounterfactualQuery& query);

class JudgeProvider {
public:
    virtual ~JudgeProvider() = default;

    /// Throws MalformedResponse when the answer cannot be parsed.
    virtual JudgeResponse ask(std::string_view event_a, std::string_view event_b,
                              Question q) const = 0;
    virtual CounterfactualAnswer counterfactual(const CounterfactualQuery& query) const = 0;
};

/// Pure token-overlap judge. Answers yes to either question iff
///   |content(B) ∩ content(A)| / |content(B)| >= threshold
/// over lowercased token sets with stopwords removed. When B has no
/// content tokens, answers yes iff A has none either.
///
/// The counterfactual baseline answers "causal" iff the candidate cause and
/// the fifth event share a content token.
class MockJudge final : public JudgeProvider {
public:
    explicit MockJudge(double threshold = kDefaultThreshold) : threshold_(threshold) {}

    JudgeResponse ask(std::string_view event_a, std::string_view event_b,
                      Question q) const override;
    CounterfactualAnswer counterfactual(const CounterfactualQuery& query) const override;

    static double overlap(std::string_view event_a, std::string_view event_b);
    double threshold() const noexcept { return threshold_; }

    static constexpr double kDefaultThreshold = 0.6;

private:
    double threshold_;
};

struct SimilarityJudgement {
    bool similar = false; // r1 || r2
    std::array<JudgeResponse, 2> responses;
};

/// Ask both questions independently and OR the answers. A malformed answer
/// is re-asked once; a second malformed answer propagates MalformedResponse.
SimilarityJudgement judge_similarity_detailed(const JudgeProvider& provider,
                                              std::string_view event_a,
                                              std::string_view event_b);

bool judge_similarity(const JudgeProvider& provider, std::string_view event_a,
                      std::string_view event_b);

} // namespace synthctl
