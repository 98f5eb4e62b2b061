#pragma once

#include <span>
#include <string>
#include <vector>

#include "synthctl/embedding.hpp"

namespace synthctl {

/// Ridge-regression donor weights and fit diagnostics.
struct DonorWeights {
    std::vector<double> w;
    double lambda = 0.0;
    /// ||u_study - sum_j w_j u_j||
    double residual_norm = 0.0;
    std::vector<std::string> donor_ids;
    /// Departure-from-convexity diagnostics; weights are unconstrained.
    double weight_sum = 0.0;
    double min_weight = 0.0;
};

/// Minimize ||u_study - sum_j w_j u_j||^2 + lambda * ||w||^2 by solving
/// (G^T G + lambda I) w = G^T u_study with G = [u_1 ... u_J].
///
/// `donor_ids` defaults to "0".."J-1". Throws on dimension mismatch, on
/// negative lambda, and when lambda is 0 and the Gram matrix is singular.
DonorWeights fit_weights(const EmbeddingVector& u_study, std::span<const EmbeddingVector> donors,
                         double lambda, std::vector<std::string> donor_ids = {});

/// sum_j w_j o_j, donors in the same order as `weights`.
EmbeddingVector combine_outcomes(const DonorWeights& weights,
                                 std::span<const EmbeddingVector> outcomes);

/// ||u - G w||^2 + lambda ||w||^2
double ridge_objective(const EmbeddingVector& u_study, std::span<const EmbeddingVector> donors,
                       std::span<const double> w, double lambda);

namespace detail {

/// Solve the n x n row-major system a x = b by Gaussian elimination with
/// partial pivoting. Returns false when a pivot falls below `pivot_floor`.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 double pivot_floor, std::vector<double>& x);

} // namespace detail

} // namespace synthctl
