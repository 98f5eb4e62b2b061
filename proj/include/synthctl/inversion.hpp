#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthctl/embedding.hpp"

namespace synthctl {

struct InversionParams {
    int steps = 10;
    int beam_width = 4;
};

struct RegistryEntry {
    std::string text;
    EmbeddingVector vector;
};

/// Maps an embedding back to text.
class InversionProvider {
public:
    virtual ~InversionProvider() = default;

    /// `donor_outcomes` are the outcome texts of the kept donors. Live
    /// backends ignore them; the mock adds them to its registry.
    virtual std::string invert(const EmbeddingVector& target, const InversionParams& params,
                               std::span<const RegistryEntry> donor_outcomes) const = 0;
    /// Expected input dimension, when known.
    virtual std::optional<std::size_t> dim() const { return std::nullopt; }
};

/// Returns the registry text whose vector has the highest cosine with the
/// target; ties go to the earlier entry. The registry is the constructor
/// entries followed by the donor outcomes of the call. Steps and beam
/// width are ignored.
class MockInversionProvider final : public InversionProvider {
public:
    MockInversionProvider() = default;
    explicit MockInversionProvider(std::vector<RegistryEntry> registry);

    std::string invert(const EmbeddingVector& target, const InversionParams& params,
                       std::span<const RegistryEntry> donor_outcomes) const override;

private:
    std::vector<RegistryEntry> registry_;
};

/// Validates steps, beam width and dimension, then delegates.
std::string invert(const InversionProvider& provider, const EmbeddingVector& target,
                   const InversionParams& params,
                   std::span<const RegistryEntry> donor_outcomes = {});

} // namespace synthctl
