#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace synthctl {

class Corpus;
class PreprocessedStore;

enum class IndexField { Raw, Anonymized };

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc; // ordinal into Index::doc_ids(), which is sorted
    std::uint32_t tf;

    bool operator==(const Posting&) const = default;
};

struct SearchHit {
    std::string doc_id;
    double score;
};

/// Okapi BM25 over an immutable inverted index.
///
///   idf(t)   = ln((N - df + 0.5) / (df + 0.5) + 1)
///   score    = sum_t idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
///
/// Document ordinals follow ascending document id, so postings sorted by
/// ordinal are also sorted by id.
class Index {
public:
    using Entry = std::pair<std::string, std::string>; // (doc id, text)

    Index() = default;
    static Index build(std::span<const Entry> documents, Bm25Params params = {});

    std::size_t document_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    std::uint32_t doc_length(std::string_view doc_id) const;
    std::size_t term_count() const noexcept { return postings_.size(); }

    /// Postings for `term`, or an empty span when the term is unknown.
    std::span<const Posting> postings(std::string_view term) const;
    double idf(std::string_view term) const;

    /// Terms absent from the document contribute 0. Throws for unknown ids.
    double score(std::span<const std::string> query_terms, std::string_view doc_id) const;

    /// Top `n` documents with positive score, by descending score and then
    /// ascending id.
    std::vector<SearchHit> search(std::string_view query, std::size_t n) const;

    void save(const std::filesystem::path& path) const;
    static Index load(const std::filesystem::path& path);

    static constexpr std::uint32_t kFormatVersion = 1;

private:
    std::uint32_t ordinal(std::string_view doc_id) const;
    double score_ordinal(std::span<const std::string> query_terms, std::uint32_t doc) const;
    void rebuild_lookup();

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::unordered_map<std::string, std::uint32_t> ordinals_;
};

/// Index the chosen field of every document. The anonymized field is read
/// from `store`, which must hold an entry per document.
Index build_index(const Corpus& corpus, IndexField field,
                  const PreprocessedStore* store = nullptr, Bm25Params params = {});

double bm25_score(const Index& index, std::span<const std::string> query_terms,
                  std::string_view doc_id);

std::vector<SearchHit> search(const Index& index, std::string_view query, std::size_t n);

} // namespace synthctl
