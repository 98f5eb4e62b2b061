#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace synthctl {

/// Lowercase, split on runs of non-alphanumeric bytes, drop empty tokens.
/// Bytes >= 0x80 count as alphanumeric so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

/// Tokens of `text` with the frozen stopword list removed.
std::vector<std::string> content_tokens(std::string_view text);

bool is_stopword(std::string_view token);

std::string trim(std::string_view text);

/// Split on terminal punctuation (. ! ?), keeping the punctuation with its
/// sentence. Empty segments are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Join events into one segment. Events already ending in terminal
/// punctuation are separated by a space, others by ". ".
std::string join_events(const std::vector<std::string>& events);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

} // namespace synthctl
