#include "synthctl/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <tuple>
#include <unordered_set>

#include "synthctl/error.hpp"
#include "synthctl/text.hpp"

namespace synthctl {

namespace {

constexpr char kCacheMagic[8] = {'S', 'C', 'E', 'M', 'B', 'C', 'H', 'E'};
constexpr std::uint32_t kCacheVersion = 1;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return static_cast<bool>(in);
}

void write_record(std::ostream& out, const std::string& text, const EmbeddingVector& v) {
    write_pod(out, static_cast<std::uint32_t>(v.model_id().size()));
    out.write(v.model_id().data(), static_cast<std::streamsize>(v.model_id().size()));
    write_pod(out, fnv1a64(text));
    write_pod(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_pod(out, static_cast<std::uint32_t>(v.dim()));
    out.write(reinterpret_cast<const char*>(v.values().data()),
              static_cast<std::streamsize>(v.dim() * sizeof(double)));
}

void write_header(std::ostream& out) {
    out.write(kCacheMagic, sizeof(kCacheMagic));
    write_pod(out, kCacheVersion);
}

} // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values, std::string model_id)
    : values_(std::move(values)), model_id_(std::move(model_id)) {
    if (values_.empty())
        throw Error(Stage::Embed, "embedding has dimension 0");
    for (double x : values_)
        if (!std::isfinite(x))
            throw Error(Stage::Embed, "embedding has a non-finite entry");
}

double EmbeddingVector::norm() const noexcept {
    double sum = 0.0;
    for (double x : values_)
        sum += x * x;
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim == 0)
        throw std::invalid_argument("mock embedding dimension must be positive");
}

std::string MockEmbeddingProvider::model_id() const {
    return "mock-hash-" + std::to_string(dim_) + "-" + std::to_string(seed_);
}

std::vector<double> MockEmbeddingProvider::token_vector(std::string_view token) const {
    std::uint64_t state = fnv1a64(token) ^ seed_;
    std::vector<double> v(dim_);
    double sq = 0.0;
    for (auto& x : v) {
        const auto bits = splitmix64(state) >> 11;
        x = static_cast<double>(bits) * 0x1.0p-53 * 2.0 - 1.0;
        sq += x * x;
    }
    const double n = std::sqrt(sq);
    for (auto& x : v)
        x /= n;
    return v;
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed(std::span<const std::string> texts) const {
    ++calls_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        const auto tokens = tokenize(text);
        if (tokens.empty())
            throw Error(Stage::Embed, "text has no tokens: '" + text + "'");
        std::vector<double> sum(dim_, 0.0);
        for (const auto& token : tokens) {
            const auto tv = token_vector(token);
            for (std::size_t i = 0; i < dim_; ++i)
                sum[i] += tv[i];
        }
        double sq = 0.0;
        for (double x : sum)
            sq += x * x;
        const double n = std::sqrt(sq);
        if (n == 0.0)
            throw Error(Stage::Embed, "token vectors cancel for '" + text + "'");
        for (auto& x : sum)
            x /= n;
        out.emplace_back(std::move(sum), model_id());
    }
    return out;
}

// ---------------------------------------------------------------------------

std::size_t EmbeddingCache::KeyHash::operator()(const Key& k) const noexcept {
    return static_cast<std::size_t>(fnv1a64(k.text) ^ (fnv1a64(k.model_id) * 31));
}

std::unique_ptr<EmbeddingCache> EmbeddingCache::open(const std::filesystem::path& path) {
    auto cache = std::make_unique<EmbeddingCache>();
    const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
    if (exists)
        cache->load(path);
    cache->journal_.open(path, std::ios::binary | std::ios::app);
    if (!cache->journal_)
        throw Error(Stage::Embed, "cannot open embedding cache '" + path.string() + "'");
    if (!exists) {
        write_header(cache->journal_);
        cache->journal_.flush();
    }
    return cache;
}

std::optional<EmbeddingVector> EmbeddingCache::find(std::string_view model_id,
                                                    std::string_view text) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(Key{std::string(model_id), std::string(text)});
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void EmbeddingCache::insert_locked(std::string text, EmbeddingVector vector) {
    auto [dim_it, fresh] = dims_.emplace(vector.model_id(), vector.dim());
    if (!fresh && dim_it->second != vector.dim())
        throw Error(Stage::Embed, "model '" + vector.model_id() + "' changed dimension from " +
                                      std::to_string(dim_it->second) + " to " +
                                      std::to_string(vector.dim()));
    Key key{vector.model_id(), std::move(text)};
    if (journal_.is_open() && !entries_.contains(key)) {
        write_record(journal_, key.text, vector);
        journal_.flush();
    }
    entries_.insert_or_assign(std::move(key), std::move(vector));
}

void EmbeddingCache::insert(std::string_view text, const EmbeddingVector& vector) {
    std::unique_lock lock(mutex_);
    insert_locked(std::string(text), vector);
}

std::optional<std::size_t> EmbeddingCache::dim_for(std::string_view model_id) const {
    std::shared_lock lock(mutex_);
    auto it = dims_.find(std::string(model_id));
    if (it == dims_.end())
        return std::nullopt;
    return it->second;
}

std::size_t EmbeddingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
    std::shared_lock lock(mutex_);
    std::vector<const std::pair<const Key, EmbeddingVector>*> ordered;
    for (const auto& entry : entries_)
        ordered.push_back(&entry);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        return std::tie(a->first.model_id, a->first.text) <
               std::tie(b->first.model_id, b->first.text);
    });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Stage::Embed, "cannot write embedding cache '" + path.string() + "'");
    write_header(out);
    for (const auto* entry : ordered)
        write_record(out, entry->first.text, entry->second);
}

void EmbeddingCache::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Stage::Embed, "cannot read embedding cache '" + path.string() + "'");
    char magic[sizeof(kCacheMagic)];
    std::uint32_t version = 0;
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0 || !read_pod(in, version))
        throw Error(Stage::Embed, "'" + path.string() + "' is not an embedding cache");
    if (version != kCacheVersion)
        throw Error(Stage::Embed, "unsupported embedding cache version " + std::to_string(version));

    std::unique_lock lock(mutex_);
    while (true) {
        std::uint32_t model_len = 0;
        if (!read_pod(in, model_len))
            break; // clean end of file
        std::string model(model_len, '\0');
        std::uint64_t hash = 0;
        std::uint32_t text_len = 0, dim = 0;
        in.read(model.data(), model_len);
        read_pod(in, hash);
        read_pod(in, text_len);
        std::string text(text_len, '\0');
        in.read(text.data(), text_len);
        read_pod(in, dim);
        std::vector<double> values(dim);
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(dim * sizeof(double)));
        if (!in)
            throw Error(Stage::Embed, "embedding cache '" + path.string() + "' is truncated");
        if (hash != fnv1a64(text))
            throw Error(Stage::Embed, "embedding cache record hash does not match its text");
        insert_locked(std::move(text), EmbeddingVector(std::move(values), std::move(model)));
    }
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> embed(const EmbeddingProvider& provider, EmbeddingCache* cache,
                                   std::span<const std::string> texts) {
    const auto model = provider.model_id();
    for (const auto& text : texts)
        if (trim(text).empty())
            throw Error(Stage::Embed, "cannot embed an empty text");

    std::vector<std::optional<EmbeddingVector>> out(texts.size());
    std::vector<std::string> misses;
    std::unordered_set<std::string> queued;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (cache)
            out[i] = cache->find(model, texts[i]);
        if (!out[i] && queued.insert(texts[i]).second)
            misses.push_back(texts[i]);
    }

    if (!misses.empty()) {
        auto fresh = provider.embed(misses);
        if (fresh.size() != misses.size())
            throw Error(Stage::Embed, "provider returned " + std::to_string(fresh.size()) +
                                          " vectors for " + std::to_string(misses.size()) +
                                          " texts");
        std::unordered_map<std::string, std::size_t> slot;
        for (std::size_t i = 0; i < misses.size(); ++i) {
            if (cache) {
                if (auto d = cache->dim_for(model); d && *d != fresh[i].dim())
                    throw Error(Stage::Embed,
                                "cached vectors for '" + model + "' have dimension " +
                                    std::to_string(*d) + " but the provider returned " +
                                    std::to_string(fresh[i].dim()) + " (model changed?)");
                cache->insert(misses[i], fresh[i]);
            }
            slot.emplace(misses[i], i);
        }
        for (std::size_t i = 0; i < texts.size(); ++i)
            if (!out[i])
                out[i] = fresh[slot.at(texts[i])];
    }

    std::vector<EmbeddingVector> result;
    result.reserve(out.size());
    const auto dim = out.empty() ? 0 : out.front()->dim();
    for (auto& v : out) {
        if (v->dim() != dim)
            throw Error(Stage::Embed, "embeddings in one batch differ in dimension");
        result.push_back(std::move(*v));
    }
    return result;
}

EmbeddingVector embed_one(const EmbeddingProvider& provider, EmbeddingCache* cache,
                          const std::string& text) {
    return std::move(embed(provider, cache, std::span(&text, 1)).front());
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(Stage::Embed, "cosine of vectors with dimensions " + std::to_string(a.size()) +
                                      " and " + std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw Error(Stage::Embed, "cosine of a zero vector");
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine(a.values(), b.values());
}

} // namespace synthctl
