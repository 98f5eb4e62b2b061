#include "synthctl/text.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>

namespace synthctl {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

bool is_terminal(char c) {
    return c == '.' || c == '!' || c == '?';
}

// Frozen: the mock judge threshold is calibrated against this list.
constexpr std::string_view kStopwords[] = {
    "a",    "an",   "the",   "and",  "or",   "but",  "to",    "of",   "in",   "on",   "at",
    "for",  "with", "his",   "her",  "he",   "she",  "they",  "it",   "was",  "were", "is",
    "are",  "be",   "been",  "had",  "has",  "have", "i",     "you",  "we",   "him",  "them",
    "their", "its", "my",    "our",  "your", "that", "this",  "as",   "by",   "from", "so",
    "then", "there", "up",   "out",  "very", "did",  "do",    "me",
};

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

bool is_stopword(std::string_view token) {
    return std::find(std::begin(kStopwords), std::end(kStopwords), token) != std::end(kStopwords);
}

std::vector<std::string> content_tokens(std::string_view text) {
    auto tokens = tokenize(text);
    std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
    return tokens;
}

std::string trim(std::string_view text) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!text.empty() && is_space(text.front()))
        text.remove_prefix(1);
    while (!text.empty() && is_space(text.back()))
        text.remove_suffix(1);
    return std::string(text);
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_terminal(text[i]))
            continue;
        // keep runs like "?!" or "..." together
        while (i + 1 < text.size() && is_terminal(text[i + 1]))
            ++i;
        auto sentence = trim(text.substr(start, i + 1 - start));
        if (!sentence.empty() && !tokenize(sentence).empty())
            sentences.push_back(std::move(sentence));
        start = i + 1;
    }
    auto tail = trim(text.substr(std::min(start, text.size())));
    if (!tail.empty() && !tokenize(tail).empty())
        sentences.push_back(std::move(tail));
    return sentences;
}

std::string join_events(const std::vector<std::string>& events) {
    std::string joined;
    for (const auto& raw : events) {
        auto event = trim(raw);
        if (event.empty())
            continue;
        if (!joined.empty())
            joined += is_terminal(joined.back()) ? " " : ". ";
        joined += event;
    }
    return joined;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = 14695981039346656037ULL;
    for (char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

} // namespace synthctl
