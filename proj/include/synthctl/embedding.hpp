#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace synthctl {

/// Dense text embedding tagged with the model that produced it.
/// Entries are always finite.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    EmbeddingVector(std::vector<double> values, std::string model_id);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    const std::string& model_id() const noexcept { return model_id_; }
    double norm() const noexcept;
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
    std::string model_id_;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string model_id() const = 0;
    virtual std::size_t dim() const = 0;
    /// One vector per text, in input order.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
};

/// Deterministic bag-of-tokens embedding. Each token maps to a pseudo-random
/// unit vector drawn from a splitmix64 stream seeded with
/// fnv1a64(token) ^ seed (components uniform in [-1, 1) from the top 53 bits);
/// a text is the L2-normalized sum of its token vectors.
class MockEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::size_t dim = 256, std::uint64_t seed = 0);

    std::string model_id() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

    std::vector<double> token_vector(std::string_view token) const;
    /// Number of embed() invocations so far.
    std::size_t call_count() const noexcept { return calls_.load(); }

private:
    std::size_t dim_;
    std::uint64_t seed_;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Embeddings keyed by (model id, exact text). Reads may run concurrently,
/// writes are serialized. When attached to a file, every insertion is
/// appended as a record:
///   u32 model_len, model bytes, u64 fnv1a64(text), u32 text_len, text bytes,
///   u32 dim, dim x f64
/// after an 8-byte magic and u32 version header.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    EmbeddingCache(const EmbeddingCache&) = delete;
    EmbeddingCache& operator=(const EmbeddingCache&) = delete;

    /// Load `path` if it exists and append future insertions to it.
    static std::unique_ptr<EmbeddingCache> open(const std::filesystem::path& path);

    std::optional<EmbeddingVector> find(std::string_view model_id, std::string_view text) const;
    void insert(std::string_view text, const EmbeddingVector& vector);
    /// Dimension of cached vectors for `model_id`, if any are cached.
    std::optional<std::size_t> dim_for(std::string_view model_id) const;
    std::size_t size() const;

    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

private:
    struct Key {
        std::string model_id;
        std::string text;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };

    void insert_locked(std::string text, EmbeddingVector vector);

    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, EmbeddingVector, KeyHash> entries_;
    std::unordered_map<std::string, std::size_t> dims_;
    std::ofstream journal_;
};

/// Embed `texts`, consulting `cache` first (may be null). Misses are
/// deduplicated and sent to the provider in one batch.
std::vector<EmbeddingVector> embed(const EmbeddingProvider& provider, EmbeddingCache* cache,
                                   std::span<const std::string> texts);
EmbeddingVector embed_one(const EmbeddingProvider& provider, EmbeddingCache* cache,
                          const std::string& text);

double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

} // namespace synthctl
