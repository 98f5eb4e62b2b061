#include <doctest.h>

#include <cmath>
#include <numeric>

#include "synthctl/embedding.hpp"
#include "synthctl/error.hpp"
#include "synthctl/synthesis.hpp"
#include "oracles.hpp"

using namespace synthctl;

namespace {

EmbeddingVector ev(std::vector<double> v) { return EmbeddingVector(std::move(v), "t"); }

std::vector<EmbeddingVector> evs(const oracle::Matrix& m) {
    std::vector<EmbeddingVector> out;
    for (const auto& r : m)
        out.push_back(ev(r));
    return out;
}

double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

struct Instance {
    std::vector<double> u;
    oracle::Matrix donors;
};

Instance random_instance(oracle::Gen& gen, std::size_t j_lo = 1, std::size_t j_hi = 5) {
    const auto dim = gen.size(2, 16);
    const auto j = gen.size(j_lo, j_hi);
    Instance in{gen.vec(dim), {}};
    for (std::size_t k = 0; k < j; ++k)
        in.donors.push_back(gen.vec(dim));
    return in;
}

} // namespace

TEST_CASE("single donor equal to the unit study vector gives weight one half") {
    const auto u = ev({0.6, 0.8});
    const std::vector<EmbeddingVector> donors = {u};
    const auto w = fit_weights(u, donors, 1.0);
    REQUIRE(w.w.size() == 1);
    CHECK(std::fabs(w.w[0] - 0.5) <= 1e-12);
    CHECK(w.donor_ids == std::vector<std::string>{"0"});
}

TEST_CASE("three donors in four dimensions match hand elimination") {
    // G^T G = [[2,1,0],[1,2,1],[0,1,2]] + I, G^T u = [1,2,3]
    const oracle::Matrix g = {{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}};
    const std::vector<double> u = {0, 1, 1, 2};
    const auto w = fit_weights(ev(u), evs(g), 1.0, {"a", "b", "c"});
    // [[3,1,0],[1,3,1],[0,1,3]] w = [1,2,3]  ->  w = (5/21, 2/7, 19/21)
    CHECK(w.w[0] == doctest::Approx(5.0 / 21.0).epsilon(1e-14));
    CHECK(w.w[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
    CHECK(w.w[2] == doctest::Approx(19.0 / 21.0).epsilon(1e-14));
    CHECK(w.weight_sum == doctest::Approx(5.0 / 21 + 2.0 / 7 + 19.0 / 21));
    CHECK(w.min_weight == doctest::Approx(5.0 / 21));
    CHECK(w.donor_ids == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("fit_weights agrees with the normal-equations reference") {
    oracle::Gen gen(1234);
    const double lambdas[] = {0.01, 0.1, 1, 10};
    for (int i = 0; i < 100; ++i) {
        const auto in = random_instance(gen);
        const double lambda = lambdas[gen.size(0, 3)];
        const auto got = fit_weights(ev(in.u), evs(in.donors), lambda);
        const auto ref = oracle::ridge(in.u, in.donors, lambda);
        std::vector<double> diff(ref.size());
        for (std::size_t k = 0; k < ref.size(); ++k)
            diff[k] = got.w[k] - ref[k];
        CHECK(norm(diff) <= 1e-9 * std::max(1.0, norm(ref)));
    }
}

TEST_CASE("weights satisfy the normal equations") {
    oracle::Gen gen(99);
    for (int i = 0; i < 200; ++i) {
        const auto in = random_instance(gen);
        const double lambda = std::pow(10.0, gen.real(-3, 2));
        const auto w = fit_weights(ev(in.u), evs(in.donors), lambda).w;
        const auto j = in.donors.size();
        std::vector<double> r(j), gtu(j);
        for (std::size_t a = 0; a < j; ++a) {
            double acc = lambda * w[a];
            for (std::size_t b = 0; b < j; ++b)
                acc += std::inner_product(in.donors[a].begin(), in.donors[a].end(),
                                          in.donors[b].begin(), 0.0) * w[b];
            gtu[a] = std::inner_product(in.donors[a].begin(), in.donors[a].end(), in.u.begin(), 0.0);
            r[a] = acc - gtu[a];
        }
        CHECK(norm(r) <= 1e-9 * (1 + norm(gtu)));
    }
}

TEST_CASE("shrinkage in lambda") {
    oracle::Gen gen(77);
    const double grid[] = {0, 0.1, 1, 10, 100};
    for (int i = 0; i < 50; ++i) {
        // J <= dim keeps lambda = 0 well posed.
        auto in = random_instance(gen);
        while (in.donors.size() > in.u.size())
            in.donors.pop_back();
        double prev_w = INFINITY, prev_r = -INFINITY, prev_obj = -INFINITY;
        for (double lambda : grid) {
            const auto fit = fit_weights(ev(in.u), evs(in.donors), lambda);
            const double wn = norm(fit.w);
            CHECK(wn <= prev_w + 1e-12);
            CHECK(fit.residual_norm >= prev_r - 1e-12);
            const double obj = ridge_objective(ev(in.u), evs(in.donors), fit.w, lambda);
            CHECK(obj >= prev_obj - 1e-12 * std::max(1.0, std::fabs(obj)));
            prev_w = wn;
            prev_r = fit.residual_norm;
            prev_obj = obj;
        }
    }
}

TEST_CASE("at lambda zero the residual is orthogonal to every donor") {
    oracle::Gen gen(5);
    for (int i = 0; i < 100; ++i) {
        auto in = random_instance(gen);
        while (in.donors.size() > in.u.size())
            in.donors.pop_back();
        const auto w = fit_weights(ev(in.u), evs(in.donors), 0.0).w;
        std::vector<double> r = in.u;
        for (std::size_t j = 0; j < w.size(); ++j)
            for (std::size_t k = 0; k < r.size(); ++k)
                r[k] -= w[j] * in.donors[j][k];
        for (const auto& d : in.donors) {
            const double dot = std::inner_product(d.begin(), d.end(), r.begin(), 0.0);
            CHECK(std::fabs(dot) <= 1e-8 * norm(d) * std::max(norm(r), 1e-300) + 1e-12);
        }
    }
}

TEST_CASE("singular Gram at lambda zero is rejected") {
    const oracle::Matrix g = {{1, 2, 3}, {2, 4, 6}};
    CHECK_THROWS_AS(fit_weights(ev({1, 0, 0}), evs(g), 0.0), Error);
    CHECK_NOTHROW(fit_weights(ev({1, 0, 0}), evs(g), 0.5));
}

TEST_CASE("invalid inputs are rejected") {
    const oracle::Matrix g = {{1, 2}};
    CHECK_THROWS_AS(fit_weights(ev({1, 0}), evs(g), -1.0), Error);
    CHECK_THROWS_AS(fit_weights(ev({1, 0, 0}), evs(g), 1.0), Error);
    CHECK_THROWS_AS(fit_weights(ev({1, 0}), {}, 1.0), Error);
    CHECK_THROWS_AS(fit_weights(ev({1, 0}), evs(g), 1.0, {"a", "b"}), Error);
}

TEST_CASE("combine_outcomes is the weighted sum") {
    DonorWeights w;
    w.w = {0.2, 0.3, 0.5};
    const auto o = evs({{1, 0}, {0, 1}, {1, 1}});
    const auto c = combine_outcomes(w, o);
    CHECK(c[0] == doctest::Approx(0.7));
    CHECK(c[1] == doctest::Approx(0.8));
}

TEST_CASE("combine_outcomes is linear in the weights") {
    oracle::Gen gen(31);
    for (int i = 0; i < 100; ++i) {
        const auto dim = gen.size(1, 10);
        const auto j = gen.size(1, 5);
        oracle::Matrix o;
        for (std::size_t k = 0; k < j; ++k)
            o.push_back(gen.vec(dim));
        DonorWeights w, v, mix;
        w.w = gen.vec(j);
        v.w = gen.vec(j);
        const double a = gen.real(-2, 2), b = gen.real(-2, 2);
        for (std::size_t k = 0; k < j; ++k)
            mix.w.push_back(a * w.w[k] + b * v.w[k]);
        const auto outs = evs(o);
        bool all_zero = std::all_of(mix.w.begin(), mix.w.end(), [](double x) { return x == 0; });
        if (all_zero)
            continue;
        const auto lhs = combine_outcomes(mix, outs);
        const auto cw = combine_outcomes(w, outs);
        const auto cv = combine_outcomes(v, outs);
        for (std::size_t k = 0; k < dim; ++k)
            CHECK(lhs[k] == doctest::Approx(a * cw[k] + b * cv[k]).epsilon(1e-9).scale(10));
    }
}

TEST_CASE("permuting donors permutes weights and keeps the combination") {
    oracle::Gen gen(41);
    for (int i = 0; i < 100; ++i) {
        const auto in = random_instance(gen, 2, 5);
        oracle::Matrix outcomes;
        for (std::size_t k = 0; k < in.donors.size(); ++k)
            outcomes.push_back(gen.vec(in.u.size()));
        std::vector<std::size_t> perm(in.donors.size());
        std::iota(perm.begin(), perm.end(), 0);
        gen.shuffle(perm);
        oracle::Matrix pd, po;
        for (auto p : perm) {
            pd.push_back(in.donors[p]);
            po.push_back(outcomes[p]);
        }
        const auto w = fit_weights(ev(in.u), evs(in.donors), 1.0);
        const auto pw = fit_weights(ev(in.u), evs(pd), 1.0);
        for (std::size_t k = 0; k < perm.size(); ++k)
            CHECK(pw.w[k] == doctest::Approx(w.w[perm[k]]).epsilon(1e-10).scale(1));
        const auto c = combine_outcomes(w, evs(outcomes));
        const auto pc = combine_outcomes(pw, evs(po));
        for (std::size_t k = 0; k < c.dim(); ++k)
            CHECK(pc[k] == doctest::Approx(c[k]).epsilon(1e-10).scale(1));
    }
}

TEST_CASE("solve_dense pivots and reports singularity") {
    std::vector<double> x;
    REQUIRE(detail::solve_dense({0, 1, 1, 0}, {2, 3}, 2, 1e-12, x));
    CHECK(x[0] == doctest::Approx(3));
    CHECK(x[1] == doctest::Approx(2));
    CHECK_FALSE(detail::solve_dense({1, 2, 2, 4}, {1, 1}, 2, 1e-12, x));
}
