#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace synthctl {

/// Temporally ordered short event descriptions taken from one document.
struct EventSequence {
    std::vector<std::string> events;
    std::string source_id;

    bool operator==(const EventSequence&) const = default;
};

struct Document {
    std::string id;
    std::string raw_text;
    std::optional<EventSequence> summary;
};

/// Text-to-text transforms backed by a chat model (live) or by fixed rules
/// (mock). Implementations must be safe to call from several threads.
class TextTransformProvider {
public:
    virtual ~TextTransformProvider() = default;

    /// Replace person names with generic role terms.
    virtual std::string anonymize(std::string_view text) const = 0;
    /// Key events of `text`, chronological.
    virtual std::vector<std::string> summarize(std::string_view text) const = 0;
    /// Context that plausibly precedes `treatment`.
    virtual std::vector<std::string> augment(std::string_view treatment) const = 0;
    virtual bool deterministic() const = 0;
};

/// Rule-based provider for hermetic runs:
///   anonymize  whole-word, case-insensitive name -> role substitution
///   summarize  first 5 sentences, each cut to 14 words
///   augment    "<subject> was outside."
class MockTransformProvider final : public TextTransformProvider {
public:
    using NameRoles = std::vector<std::pair<std::string, std::string>>;

    MockTransformProvider();
    explicit MockTransformProvider(NameRoles name_roles);

    std::string anonymize(std::string_view text) const override;
    std::vector<std::string> summarize(std::string_view text) const override;
    std::vector<std::string> augment(std::string_view treatment) const override;
    bool deterministic() const override { return true; }

    static NameRoles default_name_roles();
    static constexpr std::size_t kMaxEvents = 5;
    static constexpr std::size_t kMaxEventWords = 14;

private:
    std::unordered_map<std::string, std::string> roles_; // keyed by lowercase name
};

/// Immutable set of documents with unique ids. Cheap to copy; copies share
/// storage, so concurrent readers are fine.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> documents);

    std::size_t size() const noexcept { return docs_ ? docs_->size() : 0; }
    bool empty() const noexcept { return size() == 0; }
    std::span<const Document> documents() const noexcept;
    const Document* find(std::string_view id) const;
    const Document& at(std::string_view id) const;
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    friend Corpus ingest_corpus(const std::filesystem::path& path);

    std::shared_ptr<const std::vector<Document>> docs_;
    std::shared_ptr<const std::unordered_map<std::string, std::size_t>> by_id_;
    std::vector<std::string> warnings_;
};

/// Parse a JSONL corpus: one {"id": string, "text": string} object per line.
/// Blank lines are skipped. Errors name the offending 1-based line.
Corpus ingest_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

std::string anonymize(std::string_view text, const TextTransformProvider& provider);

struct Summary {
    EventSequence sequence;
    /// The provider returned more than five events and the rest were dropped.
    bool truncated = false;
};

Summary summarize(std::string_view text, const TextTransformProvider& provider,
                  std::string source_id = {});

/// Generate a pretreatment for a treatment that opens its sequence.
/// `treatment_position` is 1-based; anything other than 1 is a caller bug.
EventSequence augment_context(std::string_view treatment, std::size_t treatment_position,
                              const TextTransformProvider& provider);

/// A document after anonymization and summarization. `raw_events` is the
/// summary of the original text and `events` its event-by-event anonymized
/// counterpart, so the two stay aligned.
struct PreprocessedDocument {
    std::string id;
    std::string anonymized;
    std::vector<std::string> events;
    std::vector<std::string> raw_events;
    bool truncated = false;
};

PreprocessedDocument preprocess_document(const Document& doc,
                                         const TextTransformProvider& provider);

/// Thread-safe cache of preprocessed documents, persisted as JSONL
/// {"id", "anonymized", "events", "raw_events"}.
class PreprocessedStore {
public:
    PreprocessedStore() = default;

    /// Merge entries from a JSONL file written by save().
    void load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::optional<PreprocessedDocument> find(std::string_view id) const;
    void insert(PreprocessedDocument doc);
    /// Cached entry for `doc`, computing and storing it when absent.
    PreprocessedDocument get_or_compute(const Document& doc,
                                        const TextTransformProvider& provider);
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, PreprocessedDocument> entries_;
};

/// Preprocess every document missing from `store`. Returns how many were
/// newly computed.
std::size_t preprocess_corpus(const Corpus& corpus, const TextTransformProvider& provider,
                              PreprocessedStore& store, std::size_t parallelism = 1);

} // namespace synthctl
