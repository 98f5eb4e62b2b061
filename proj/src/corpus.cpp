#include "synthctl/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "synthctl/error.hpp"
#include "synthctl/text.hpp"

namespace synthctl {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_word_byte(char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) != 0 || c >= 0x80;
}

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty())
                out.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty())
        out.push_back(std::move(current));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// MockTransformProvider

MockTransformProvider::NameRoles MockTransformProvider::default_name_roles() {
    return {
        {"Mary", "a girl"},   {"Tim", "a boy"},     {"Timmy", "a boy"},  {"Tom", "a boy"},
        {"Lily", "a girl"},   {"Ben", "a boy"},     {"Sue", "a girl"},   {"Sam", "a boy"},
        {"Anna", "a girl"},   {"Lucy", "a girl"},   {"Jack", "a boy"},   {"Max", "a boy"},
        {"Denise", "a girl"}, {"Buddy", "a dog"},   {"John", "a man"},   {"Sarah", "a woman"},
        {"Mia", "a girl"},    {"Leo", "a boy"},     {"Emma", "a girl"},  {"Jake", "a boy"},
    };
}

MockTransformProvider::MockTransformProvider() : MockTransformProvider(default_name_roles()) {}

MockTransformProvider::MockTransformProvider(NameRoles name_roles) {
    for (auto& [name, role] : name_roles) {
        if (name.empty() || !std::all_of(name.begin(), name.end(), is_word_byte))
            throw std::invalid_argument("mock anonymizer: name must be a single word: '" +
                                        name + "'");
        roles_[lower(name)] = std::move(role);
    }
    // Idempotence needs roles free of names.
    for (const auto& [name, role] : roles_) {
        for (const auto& token : tokenize(role)) {
            if (roles_.contains(token))
                throw Error(Stage::Anonymize, "mock anonymizer: role '" + role +
                                                  "' contains a name");
        }
    }
}

std::string MockTransformProvider::anonymize(std::string_view text) const {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(text[i])) {
            out += text[i++];
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_byte(text[j]))
            ++j;
        const auto word = text.substr(i, j - i);
        if (auto it = roles_.find(lower(word)); it != roles_.end())
            out += it->second;
        else
            out += word;
        i = j;
    }
    return out;
}

std::vector<std::string> MockTransformProvider::summarize(std::string_view text) const {
    auto sentences = split_sentences(text);
    if (sentences.size() > kMaxEvents)
        sentences.resize(kMaxEvents);
    for (auto& sentence : sentences) {
        auto ws = words(sentence);
        if (ws.size() <= kMaxEventWords)
            continue;
        ws.resize(kMaxEventWords);
        std::string cut;
        for (const auto& w : ws) {
            if (!cut.empty())
                cut += ' ';
            cut += w;
        }
        sentence = std::move(cut);
    }
    return sentences;
}

std::vector<std::string> MockTransformProvider::augment(std::string_view treatment) const {
    static const std::vector<std::string> determiners = {"a",   "an",    "the", "his", "her",
                                                         "my",  "their", "our", "some", "one"};
    const auto ws = words(treatment);
    if (ws.empty())
        throw Error(Stage::Augment, "treatment has no words");
    std::string subject = ws[0];
    if (ws.size() > 1 &&
        std::find(determiners.begin(), determiners.end(), lower(ws[0])) != determiners.end())
        subject += " " + ws[1];
    while (!subject.empty() && !is_word_byte(subject.back()))
        subject.pop_back();
    return {subject + " was outside."};
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<Document> documents) {
    auto by_id = std::make_shared<std::unordered_map<std::string, std::size_t>>();
    for (std::size_t i = 0; i < documents.size(); ++i) {
        const auto& doc = documents[i];
        if (doc.raw_text.empty())
            throw Error(Stage::Ingest, "document '" + doc.id + "' has empty text");
        if (!by_id->emplace(doc.id, i).second)
            throw Error(Stage::Ingest, "duplicate document id '" + doc.id + "'");
    }
    docs_ = std::make_shared<const std::vector<Document>>(std::move(documents));
    by_id_ = std::move(by_id);
}

std::span<const Document> Corpus::documents() const noexcept {
    if (!docs_)
        return {};
    return *docs_;
}

const Document* Corpus::find(std::string_view id) const {
    if (!by_id_)
        return nullptr;
    auto it = by_id_->find(std::string(id));
    return it == by_id_->end() ? nullptr : &(*docs_)[it->second];
}

const Document& Corpus::at(std::string_view id) const {
    if (const auto* doc = find(id))
        return *doc;
    throw Error(Stage::Retrieve, "unknown document id '" + std::string(id) + "'");
}

Corpus ingest_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Stage::Ingest, "cannot read corpus '" + path.string() + "'");

    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto where = path.string() + ": line " + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Stage::Ingest, where + ": malformed JSON: " + e.what());
        }
        if (!record.is_object())
            throw Error(Stage::Ingest, where + ": expected a JSON object");
        if (!record.contains("id") || !record["id"].is_string())
            throw Error(Stage::Ingest, where + ": missing string field \"id\"");
        if (!record.contains("text") || !record["text"].is_string())
            throw Error(Stage::Ingest, where + ": missing string field \"text\"");
        Document doc{record["id"].get<std::string>(), record["text"].get<std::string>(), {}};
        if (doc.raw_text.empty())
            throw Error(Stage::Ingest, where + ": empty \"text\"");
        if (auto [it, inserted] = first_seen.emplace(doc.id, line_no); !inserted)
            throw Error(Stage::Ingest, where + ": duplicate id '" + doc.id +
                                           "' (first seen on line " +
                                           std::to_string(it->second) + ")");
        docs.push_back(std::move(doc));
    }

    Corpus corpus(std::move(docs));
    if (corpus.empty()) {
        corpus.warnings_.push_back("corpus '" + path.string() + "' contains no documents");
        std::cerr << "warning: " << corpus.warnings_.back() << '\n';
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error(Stage::Ingest, "cannot write '" + path.string() + "'");
    for (const auto& doc : corpus.documents())
        out << nlohmann::json{{"id", doc.id}, {"text", doc.raw_text}}.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Transform operations

std::string anonymize(std::string_view text, const TextTransformProvider& provider) {
    if (trim(text).empty())
        throw Error(Stage::Anonymize, "text is empty");
    return provider.anonymize(text);
}

Summary summarize(std::string_view text, const TextTransformProvider& provider,
                  std::string source_id) {
    if (trim(text).empty())
        throw Error(Stage::Summarize, "text is empty");
    Summary summary;
    summary.sequence.source_id = std::move(source_id);
    for (auto& event : provider.summarize(text)) {
        auto cleaned = trim(event);
        if (!cleaned.empty())
            summary.sequence.events.push_back(std::move(cleaned));
    }
    if (summary.sequence.events.empty())
        throw Error(Stage::Summarize, "provider returned no events");
    if (summary.sequence.events.size() > MockTransformProvider::kMaxEvents) {
        summary.sequence.events.resize(MockTransformProvider::kMaxEvents);
        summary.truncated = true;
    }
    return summary;
}

EventSequence augment_context(std::string_view treatment, std::size_t treatment_position,
                              const TextTransformProvider& provider) {
    if (treatment_position != 1)
        throw Error(Stage::Augment, "context augmentation requested for a treatment at position " +
                                        std::to_string(treatment_position) +
                                        ", which already has a pretreatment");
    if (trim(treatment).empty())
        throw Error(Stage::Augment, "treatment is empty");
    EventSequence context;
    for (auto& sentence : provider.augment(treatment)) {
        auto cleaned = trim(sentence);
        if (!cleaned.empty())
            context.events.push_back(std::move(cleaned));
    }
    if (context.events.empty())
        throw Error(Stage::Augment, "provider returned an empty context");
    return context;
}

PreprocessedDocument preprocess_document(const Document& doc,
                                         const TextTransformProvider& provider) {
    PreprocessedDocument out;
    out.id = doc.id;
    out.anonymized = anonymize(doc.raw_text, provider);
    auto summary = summarize(doc.raw_text, provider, doc.id);
    out.truncated = summary.truncated;
    out.raw_events = std::move(summary.sequence.events);
    out.events.reserve(out.raw_events.size());
    for (const auto& event : out.raw_events)
        out.events.push_back(anonymize(event, provider));
    return out;
}

// ---------------------------------------------------------------------------
// PreprocessedStore

void PreprocessedStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Stage::Ingest, "cannot read preprocessed cache '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            PreprocessedDocument doc;
            doc.id = j.at("id").get<std::string>();
            doc.anonymized = j.at("anonymized").get<std::string>();
            doc.events = j.at("events").get<std::vector<std::string>>();
            doc.raw_events = j.contains("raw_events")
                                 ? j["raw_events"].get<std::vector<std::string>>()
                                 : doc.events;
            if (doc.raw_events.size() != doc.events.size())
                throw Error(Stage::Ingest, "events and raw_events differ in length");
            insert(std::move(doc));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Stage::Ingest,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void PreprocessedStore::save(const std::filesystem::path& path) const {
    std::vector<const PreprocessedDocument*> ordered;
    {
        std::shared_lock lock(mutex_);
        for (const auto& [id, doc] : entries_)
            ordered.push_back(&doc);
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto* a, const auto* b) { return a->id < b->id; });
        std::ofstream out(path, std::ios::trunc);
        if (!out)
            throw Error(Stage::Ingest, "cannot write '" + path.string() + "'");
        for (const auto* doc : ordered) {
            out << nlohmann::json{{"id", doc->id},
                                  {"anonymized", doc->anonymized},
                                  {"events", doc->events},
                                  {"raw_events", doc->raw_events}}
                       .dump()
                << '\n';
        }
    }
}

std::optional<PreprocessedDocument> PreprocessedStore::find(std::string_view id) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(std::string(id));
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void PreprocessedStore::insert(PreprocessedDocument doc) {
    std::unique_lock lock(mutex_);
    auto id = doc.id;
    entries_.insert_or_assign(std::move(id), std::move(doc));
}

PreprocessedDocument PreprocessedStore::get_or_compute(const Document& doc,
                                                       const TextTransformProvider& provider) {
    if (auto hit = find(doc.id))
        return *hit;
    auto computed = preprocess_document(doc, provider);
    std::unique_lock lock(mutex_);
    // another thread may have won the race; keep the first entry
    auto [it, inserted] = entries_.emplace(computed.id, computed);
    return it->second;
}

std::size_t PreprocessedStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::size_t preprocess_corpus(const Corpus& corpus, const TextTransformProvider& provider,
                              PreprocessedStore& store, std::size_t parallelism) {
    std::vector<const Document*> pending;
    for (const auto& doc : corpus.documents())
        if (!store.find(doc.id))
            pending.push_back(&doc);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (auto i = next++; i < pending.size(); i = next++) {
            try {
                store.get_or_compute(*pending[i], provider);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = pending.size();
            }
        }
    };
    const auto threads = std::max<std::size_t>(1, std::min(parallelism, pending.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
    return pending.size();
}

} // namespace synthctl
