#include "synthctl/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "synthctl/error.hpp"

namespace synthctl {

namespace detail {

bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 double pivot_floor, std::vector<double>& x) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col]))
                pivot = r;
        if (!(std::abs(a[pivot * n + col]) > pivot_floor))
            return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] / a[col * n + col];
            if (factor == 0.0)
                continue;
            for (std::size_t c = col; c < n; ++c)
                a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t c = i + 1; c < n; ++c)
            sum -= a[i * n + c] * x[c];
        x[i] = sum / a[i * n + i];
    }
    return true;
}

} // namespace detail

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

std::vector<double> residual(const EmbeddingVector& u_study,
                             std::span<const EmbeddingVector> donors, std::span<const double> w) {
    std::vector<double> r(u_study.values().begin(), u_study.values().end());
    for (std::size_t j = 0; j < donors.size(); ++j)
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= w[j] * donors[j][i];
    return r;
}

void check_dims(const EmbeddingVector& u_study, std::span<const EmbeddingVector> donors) {
    for (std::size_t j = 0; j < donors.size(); ++j)
        if (donors[j].dim() != u_study.dim())
            throw Error(Stage::Synthesize, "donor " + std::to_string(j) + " has dimension " +
                                               std::to_string(donors[j].dim()) +
                                               ", study unit has " +
                                               std::to_string(u_study.dim()));
}

} // namespace

DonorWeights fit_weights(const EmbeddingVector& u_study, std::span<const EmbeddingVector> donors,
                         double lambda, std::vector<std::string> donor_ids) {
    const std::size_t J = donors.size();
    if (J == 0)
        throw Error(Stage::Synthesize, "need at least one donor");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw Error(Stage::Synthesize, "lambda must be a finite non-negative number");
    check_dims(u_study, donors);
    if (donor_ids.empty()) {
        for (std::size_t j = 0; j < J; ++j)
            donor_ids.push_back(std::to_string(j));
    } else if (donor_ids.size() != J) {
        throw Error(Stage::Synthesize, "donor id count does not match donor count");
    }

    // (G^T G + lambda I) w = G^T u
    std::vector<double> gram(J * J);
    std::vector<double> rhs(J);
    for (std::size_t i = 0; i < J; ++i) {
        rhs[i] = dot(donors[i].values(), u_study.values());
        for (std::size_t k = i; k < J; ++k) {
            const double g = dot(donors[i].values(), donors[k].values());
            gram[i * J + k] = g;
            gram[k * J + i] = g;
        }
        gram[i * J + i] += lambda;
    }

    double scale = 0.0;
    for (std::size_t i = 0; i < J; ++i)
        scale = std::max(scale, std::abs(gram[i * J + i]));
    const double floor =
        std::max(scale, 1.0) * static_cast<double>(J) * 1e3 * std::numeric_limits<double>::epsilon();

    DonorWeights out;
    if (!detail::solve_dense(gram, rhs, J, floor, out.w))
        throw Error(Stage::Synthesize,
                    lambda == 0.0
                        ? "donor Gram matrix is singular; use lambda > 0"
                        : "regularized Gram system is singular");

    out.lambda = lambda;
    out.donor_ids = std::move(donor_ids);
    const auto r = residual(u_study, donors, out.w);
    out.residual_norm = std::sqrt(dot(r, r));
    out.weight_sum = std::accumulate(out.w.begin(), out.w.end(), 0.0);
    out.min_weight = *std::min_element(out.w.begin(), out.w.end());
    return out;
}

EmbeddingVector combine_outcomes(const DonorWeights& weights,
                                 std::span<const EmbeddingVector> outcomes) {
    if (outcomes.size() != weights.w.size())
        throw Error(Stage::Synthesize, std::to_string(outcomes.size()) + " outcomes for " +
                                           std::to_string(weights.w.size()) + " weights");
    if (outcomes.empty())
        throw Error(Stage::Synthesize, "no outcomes to combine");
    const auto dim = outcomes.front().dim();
    std::vector<double> sum(dim, 0.0);
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
        if (outcomes[j].dim() != dim)
            throw Error(Stage::Synthesize, "outcome embeddings differ in dimension");
        for (std::size_t i = 0; i < dim; ++i)
            sum[i] += weights.w[j] * outcomes[j][i];
    }
    return EmbeddingVector(std::move(sum), outcomes.front().model_id());
}

double ridge_objective(const EmbeddingVector& u_study, std::span<const EmbeddingVector> donors,
                       std::span<const double> w, double lambda) {
    check_dims(u_study, donors);
    if (w.size() != donors.size())
        throw Error(Stage::Synthesize, "weight count does not match donor count");
    const auto r = residual(u_study, donors, w);
    return dot(r, r) + lambda * dot(w, w);
}

} // namespace synthctl
