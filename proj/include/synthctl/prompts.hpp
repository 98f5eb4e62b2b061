#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace synthctl::prompts {

// Verbatim templates, compiled in from assets/prompts/.
std::string_view summarize_template();
std::string_view similarity_template();
std::string_view anonymize_template();
std::string_view counterfactual_template();
std::string_view augment_template();

/// Substitute `{name}` placeholders, then collapse `{{`/`}}` escapes.
std::string fill(std::string_view tmpl,
                 const std::vector<std::pair<std::string, std::string>>& values);

} // namespace synthctl::prompts
