#include "synthctl/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "synthctl/corpus.hpp"
#include "synthctl/error.hpp"
#include "synthctl/text.hpp"

namespace synthctl {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'B', 'M', '2', '5', 'I', 'X'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in)
        throw Error(Stage::Retrieve, "index file truncated");
    return value;
}

std::string read_string(std::istream& in) {
    const auto size = read_pod<std::uint32_t>(in);
    std::string s(size, '\0');
    in.read(s.data(), size);
    if (!in)
        throw Error(Stage::Retrieve, "index file truncated");
    return s;
}

} // namespace

Index Index::build(std::span<const Entry> documents, Bm25Params params) {
    if (documents.empty())
        throw Error(Stage::Retrieve, "cannot build an index over an empty corpus");

    std::vector<const Entry*> sorted;
    sorted.reserve(documents.size());
    for (const auto& entry : documents)
        sorted.push_back(&entry);
    std::sort(sorted.begin(), sorted.end(),
              [](const Entry* a, const Entry* b) { return a->first < b->first; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i - 1]->first == sorted[i]->first)
            throw Error(Stage::Retrieve, "duplicate document id '" + sorted[i]->first + "'");

    Index index;
    index.params_ = params;
    std::uint64_t total_length = 0;
    for (std::uint32_t ord = 0; ord < sorted.size(); ++ord) {
        const auto tokens = tokenize(sorted[ord]->second);
        index.doc_ids_.push_back(sorted[ord]->first);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_length += tokens.size();

        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : tokens)
            ++tf[t];
        for (const auto& [term, count] : tf)
            index.postings_[std::string(term)].push_back({ord, count});
    }
    index.avg_doc_length_ =
        static_cast<double>(total_length) / static_cast<double>(index.doc_ids_.size());
    index.rebuild_lookup();
    return index;
}

void Index::rebuild_lookup() {
    ordinals_.clear();
    for (std::uint32_t i = 0; i < doc_ids_.size(); ++i)
        ordinals_.emplace(doc_ids_[i], i);
}

std::uint32_t Index::ordinal(std::string_view doc_id) const {
    auto it = ordinals_.find(std::string(doc_id));
    if (it == ordinals_.end())
        throw Error(Stage::Retrieve, "document '" + std::string(doc_id) + "' is not indexed");
    return it->second;
}

std::uint32_t Index::doc_length(std::string_view doc_id) const {
    return doc_lengths_[ordinal(doc_id)];
}

std::span<const Posting> Index::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    if (it == postings_.end())
        return {};
    return it->second;
}

double Index::idf(std::string_view term) const {
    const auto n = static_cast<double>(doc_ids_.size());
    const auto df = static_cast<double>(postings(term).size());
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double Index::score_ordinal(std::span<const std::string> query_terms, std::uint32_t doc) const {
    const double dl = doc_lengths_[doc];
    const double norm =
        avg_doc_length_ > 0.0 ? params_.k1 * (1.0 - params_.b + params_.b * dl / avg_doc_length_)
                              : params_.k1;
    double total = 0.0;
    for (const auto& term : query_terms) {
        const auto list = postings(term);
        auto it = std::lower_bound(list.begin(), list.end(), doc,
                                   [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (it == list.end() || it->doc != doc)
            continue;
        const double tf = it->tf;
        total += idf(term) * tf * (params_.k1 + 1.0) / (tf + norm);
    }
    return total;
}

double Index::score(std::span<const std::string> query_terms, std::string_view doc_id) const {
    return score_ordinal(query_terms, ordinal(doc_id));
}

std::vector<SearchHit> Index::search(std::string_view query, std::size_t n) const {
    if (n == 0)
        throw Error(Stage::Retrieve, "search size must be at least 1");
    const auto terms = tokenize(query);

    std::vector<std::uint32_t> candidates;
    for (const auto& term : terms)
        for (const auto& p : postings(term))
            candidates.push_back(p.doc);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(candidates.size());
    for (auto doc : candidates) {
        const double s = score_ordinal(terms, doc);
        if (s > 0.0)
            scored.emplace_back(s, doc);
    }
    // ordinals follow id order, so the ordinal breaks ties by ascending id
    auto better = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    const auto keep = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), better);
    scored.resize(keep);

    std::vector<SearchHit> hits;
    hits.reserve(keep);
    for (const auto& [s, doc] : scored)
        hits.push_back({doc_ids_[doc], s});
    return hits;
}

void Index::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Stage::Retrieve, "cannot write index '" + path.string() + "'");
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kFormatVersion);
    write_pod(out, params_.k1);
    write_pod(out, params_.b);
    write_pod(out, avg_doc_length_);
    write_pod(out, static_cast<std::uint32_t>(doc_ids_.size()));
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        write_string(out, doc_ids_[i]);
        write_pod(out, doc_lengths_[i]);
    }
    // sorted terms keep the file byte-stable across runs
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, list] : postings_)
        terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });
    write_pod(out, static_cast<std::uint32_t>(terms.size()));
    for (const auto* term : terms) {
        const auto& list = postings_.at(*term);
        write_string(out, *term);
        write_pod(out, static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            write_pod(out, p.doc);
            write_pod(out, p.tf);
        }
    }
    if (!out)
        throw Error(Stage::Retrieve, "failed writing index '" + path.string() + "'");
}

Index Index::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Stage::Retrieve, "cannot read index '" + path.string() + "'");
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(Stage::Retrieve, "'" + path.string() + "' is not an index file");
    if (const auto version = read_pod<std::uint32_t>(in); version != kFormatVersion)
        throw Error(Stage::Retrieve, "unsupported index format version " + std::to_string(version));

    Index index;
    index.params_.k1 = read_pod<double>(in);
    index.params_.b = read_pod<double>(in);
    index.avg_doc_length_ = read_pod<double>(in);
    const auto docs = read_pod<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < docs; ++i) {
        index.doc_ids_.push_back(read_string(in));
        index.doc_lengths_.push_back(read_pod<std::uint32_t>(in));
    }
    const auto terms = read_pod<std::uint32_t>(in);
    for (std::uint32_t t = 0; t < terms; ++t) {
        auto term = read_string(in);
        const auto count = read_pod<std::uint32_t>(in);
        std::vector<Posting> list(count);
        for (auto& p : list) {
            p.doc = read_pod<std::uint32_t>(in);
            p.tf = read_pod<std::uint32_t>(in);
            if (p.doc >= docs)
                throw Error(Stage::Retrieve, "posting refers to unknown document");
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    index.rebuild_lookup();
    return index;
}

Index build_index(const Corpus& corpus, IndexField field, const PreprocessedStore* store,
                  Bm25Params params) {
    if (corpus.empty())
        throw Error(Stage::Retrieve, "cannot build an index over an empty corpus");
    std::vector<Index::Entry> entries;
    entries.reserve(corpus.size());
    for (const auto& doc : corpus.documents()) {
        if (field == IndexField::Raw) {
            entries.emplace_back(doc.id, doc.raw_text);
            continue;
        }
        if (!store)
            throw Error(Stage::Retrieve, "anonymized index needs preprocessed documents");
        auto pre = store->find(doc.id);
        if (!pre)
            throw Error(Stage::Retrieve, "document '" + doc.id + "' has not been preprocessed");
        entries.emplace_back(doc.id, pre->anonymized);
    }
    return Index::build(entries, params);
}

double bm25_score(const Index& index, std::span<const std::string> query_terms,
                  std::string_view doc_id) {
    return index.score(query_terms, doc_id);
}

std::vector<SearchHit> search(const Index& index, std::string_view query, std::size_t n) {
    return index.search(query, n);
}

} // namespace synthctl
