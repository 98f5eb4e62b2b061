#include "synthctl/prompts.hpp"

#include "prompt_assets.hpp"

namespace synthctl::prompts {

std::string_view summarize_template() { return assets::kSummarize; }
std::string_view similarity_template() { return assets::kSimilarity; }
std::string_view anonymize_template() { return assets::kAnonymize; }
std::string_view counterfactual_template() { return assets::kCounterfactual; }
std::string_view augment_template() { return assets::kAugment; }

std::string fill(std::string_view tmpl,
                 const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl.compare(i, 2, "{{") == 0) {
            out += '{';
            i += 2;
            continue;
        }
        if (tmpl.compare(i, 2, "}}") == 0) {
            out += '}';
            i += 2;
            continue;
        }
        if (tmpl[i] == '{') {
            bool matched = false;
            for (const auto& [name, value] : values) {
                const auto placeholder = "{" + name + "}";
                if (tmpl.compare(i, placeholder.size(), placeholder) == 0) {
                    out += value;
                    i += placeholder.size();
                    matched = true;
                    break;
                }
            }
            if (matched)
                continue;
        }
        out += tmpl[i++];
    }
    return out;
}

} // namespace synthctl::prompts
