#include "synthctl/inversion.hpp"

#include "synthctl/error.hpp"

namespace synthctl {

MockInversionProvider::MockInversionProvider(std::vector<RegistryEntry> registry)
    : registry_(std::move(registry)) {}

std::string MockInversionProvider::invert(const EmbeddingVector& target, const InversionParams&,
                                          std::span<const RegistryEntry> donor_outcomes) const {
    if (registry_.empty() && donor_outcomes.empty())
        throw Error(Stage::Invert, "mock inversion registry is empty");
    if (target.norm() == 0.0)
        throw Error(Stage::Invert, "cannot invert a zero vector");

    const RegistryEntry* best = nullptr;
    double best_cos = -2.0;
    auto consider = [&](const RegistryEntry& entry) {
        const double c = cosine(target, entry.vector);
        if (c > best_cos) {
            best_cos = c;
            best = &entry;
        }
    };
    for (const auto& entry : registry_)
        consider(entry);
    for (const auto& entry : donor_outcomes)
        consider(entry);
    return best->text;
}

std::string invert(const InversionProvider& provider, const EmbeddingVector& target,
                   const InversionParams& params, std::span<const RegistryEntry> donor_outcomes) {
    if (params.steps < 1)
        throw Error(Stage::Invert, "steps must be at least 1");
    if (params.beam_width < 1)
        throw Error(Stage::Invert, "beam width must be at least 1");
    if (auto d = provider.dim(); d && *d != target.dim())
        throw Error(Stage::Invert, "vector has dimension " + std::to_string(target.dim()) +
                                       ", inversion model expects " + std::to_string(*d));
    return provider.invert(target, params, donor_outcomes);
}

} // namespace synthctl
