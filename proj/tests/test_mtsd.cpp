#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "vsartrack/error.hpp"
#include "vsartrack/mtsd.hpp"
#include "vsartrack/simulate.hpp"

#include <cmath>
#include <limits>

using namespace vsartrack;
using Eigen::MatrixXd;

namespace {

// Thresholding through a one-sided Jacobi SVD, independent of the solver's
// divide-and-conquer SVD.
MatrixXd svt_oracle(const MatrixXd& m, double tau) {
    const Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    MatrixXd out = MatrixXd::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()(i) - tau;
        if (s > 0) out += s * svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
    }
    return out;
}

Eigen::Index numerical_rank(const MatrixXd& m) {
    const Eigen::JacobiSVD<MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > 1e-9 * std::max(s(0), 1e-300);
    return r;
}

}  // namespace

TEST_CASE("svt examples") {
    const MatrixXd m = testutil::random_matrix(6, 4);
    CHECK((mtsd::svt(m, 0.0) - m).norm() <= 1e-12);

    const double smax = Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
    CHECK(mtsd::svt(m, smax).norm() == 0.0);
    CHECK(mtsd::svt(m, 2 * smax).norm() == 0.0);

    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 3;
    d(1, 1) = 1;
    MatrixXd expected = MatrixXd::Zero(2, 2);
    expected(0, 0) = 1;
    CHECK((mtsd::svt(d, 2.0) - expected).norm() <= 1e-14);
    CHECK_THROWS_AS(mtsd::svt(m, -1.0), std::invalid_argument);
}

TEST_CASE("svt matches an independent SVD and shrinks nuclear norm and rank") {
    for (int n = 0; n < 30; ++n) {
        const MatrixXd m = testutil::random_matrix(testutil::uniform_int(2, 30), testutil::uniform_int(2, 30));
        const double tau = testutil::uniform(0.0, 2.0);
        const MatrixXd got = mtsd::svt(m, tau);
        REQUIRE((got - svt_oracle(m, tau)).norm() <= 1e-10 * std::max(1.0, m.norm()));
        REQUIRE(mtsd::nuclear_norm(got) <= mtsd::nuclear_norm(m) + 1e-12);
        REQUIRE(numerical_rank(got) <= numerical_rank(m));
    }
}

TEST_CASE("shrink examples") {
    const MatrixXd m = testutil::random_matrix(5, 5);
    CHECK(mtsd::shrink(m, 0.0) == m);
    CHECK(mtsd::shrink(m, 1.0).norm() == 0.0);

    MatrixXd v(1, 2);
    v << 0.5, -0.5;
    const MatrixXd s = mtsd::shrink(v, 0.2);
    CHECK(s(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s(0, 1) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK_THROWS_AS(mtsd::shrink(m, -0.1), std::invalid_argument);
}

TEST_CASE("shrink is a contraction") {
    for (int n = 0; n < 500; ++n) {
        const MatrixXd a = testutil::random_matrix(4, 6, -2, 2);
        const MatrixXd b = testutil::random_matrix(4, 6, -2, 2);
        const double lambda = testutil::uniform(0.0, 1.5);
        REQUIRE((mtsd::shrink(a, lambda) - mtsd::shrink(b, lambda)).norm() <= (a - b).norm() + 1e-14);
    }
}

TEST_CASE("default thresholds") {
    CHECK(mtsd::default_lambda(100, 25) == doctest::Approx(3.0 / 10.0));
    const MatrixXd z = MatrixXd::Zero(3, 3);
    CHECK(mtsd::default_tau(z) > 0.0);
}

TEST_CASE("pure low-rank input is reconstructed with an empty sparse term") {
    const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(50, 0.2, 0.8);
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(12, 0.5, 1.0);
    const MatrixXd d = u * v.transpose();
    MatrixXd l, x, n;
    const auto rep = mtsd::decompose_matrix(d, 1e-9, 10.0, 1e-10, 200, l, x, n);
    CHECK(x.norm() == 0.0);
    CHECK((l - d).norm() / d.norm() <= 1e-6);
    CHECK(rep.iterations >= 1);
}

TEST_CASE("zero input") {
    const MatrixXd d = MatrixXd::Zero(20, 8);
    MatrixXd l, x, n;
    mtsd::decompose_matrix(d, 0.1, 0.1, 1e-6, 50, l, x, n);
    CHECK(l.norm() == 0.0);
    CHECK(x.norm() == 0.0);
    CHECK(n.norm() == 0.0);

    const auto dec = mtsd::decompose(FrameStack(4, 3, 3), {});
    CHECK(dec.L.norm() == 0.0);
    CHECK(dec.X.norm() == 0.0);
    CHECK(dec.N.norm() == 0.0);
}

TEST_CASE("objective never increases and the residual closes the split") {
    for (int n = 0; n < 20; ++n) {
        const auto rows = testutil::uniform_int(10, 60);
        const auto cols = testutil::uniform_int(5, 25);
        const MatrixXd d = testutil::random_matrix(rows, 2) * testutil::random_matrix(2, cols) +
                           testutil::random_matrix(rows, cols, -0.3, 0.3);
        MatrixXd l, x, res;
        const double tau = testutil::uniform(0.01, 1.0);
        const double lambda = testutil::uniform(0.01, 0.5);
        const auto rep = mtsd::decompose_matrix(d, tau, lambda, 1e-8, 200, l, x, res);
        REQUIRE(rep.objective.size() == static_cast<std::size_t>(rep.iterations) + 1);
        for (std::size_t i = 1; i < rep.objective.size(); ++i)
            REQUIRE(rep.objective[i] <= rep.objective[i - 1] + 1e-9);
        REQUIRE((d - (l + x + res)).norm() / d.norm() <= 1e-6);
        REQUIRE(rep.objective.back() == doctest::Approx(mtsd::objective(l, x, res, tau, lambda)).epsilon(1e-12));
    }
}

TEST_CASE("non-finite input is rejected") {
    MatrixXd d = MatrixXd::Ones(4, 4);
    d(1, 2) = std::numeric_limits<double>::quiet_NaN();
    MatrixXd l, x, n;
    CHECK_THROWS_AS(mtsd::decompose_matrix(d, 0.1, 0.1, 1e-4, 10, l, x, n), NumericalError);
}

TEST_CASE("parameter validation") {
    mtsd::DecomposeParams p;
    p.tau = -1.0;
    CHECK_THROWS_AS(p.validate(10), std::invalid_argument);
    p = {};
    p.window = 0;
    CHECK_THROWS_AS(p.validate(10), std::invalid_argument);
    p.window = 11;
    CHECK_THROWS_AS(p.validate(10), std::invalid_argument);
    p = {};
    p.max_iter = 0;
    CHECK_THROWS_AS(p.validate(10), std::invalid_argument);
}

TEST_CASE("recovery on a simulated scene") {
    sim::SceneConfig cfg;
    cfg.n_targets = 2;
    cfg.seed = 11;
    const auto scene = sim::generate(cfg);
    const auto dec = mtsd::decompose(scene.stack, {});
    CHECK(dec.converged);
    CHECK(dec.iterations <= 200);
    CHECK((dec.L - scene.oracle.background).norm() / scene.oracle.background.norm() <= 0.05);

    long tp = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < dec.X.rows(); ++i)
        for (Eigen::Index j = 0; j < dec.X.cols(); ++j) {
            const bool est = std::abs(dec.X(i, j)) > 1e-3;
            const bool truth = scene.oracle.shadow_support(i, j);
            tp += est && truth;
            fp += est && !truth;
            fn += !est && truth;
        }
    const double f1 = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    CHECK(f1 >= 0.9);
}

TEST_CASE("windowed decomposition is deterministic across thread counts") {
    sim::SceneConfig cfg;
    cfg.rows = 32;
    cfg.cols = 32;
    cfg.frames = 30;
    cfg.n_targets = 1;
    cfg.shadow_w = 4;
    cfg.shadow_h = 4;
    const auto scene = sim::generate(cfg);
    mtsd::DecomposeParams p;
    p.window = 8;
    const auto a = mtsd::decompose(scene.stack, p, 1);
    const auto b = mtsd::decompose(scene.stack, p, 3);
    REQUIRE(a.blocks.size() == 4);
    CHECK(a.blocks.back().frames == 6);
    CHECK(a.blocks[2].first_frame == 16);
    CHECK(a.L == b.L);
    CHECK(a.X == b.X);
    CHECK(a.N == b.N);
    const auto c = mtsd::decompose(scene.stack, p, 1);
    CHECK(a.X == c.X);
}

TEST_CASE("enhance") {
    const FrameStack stack(3, 2, 2);
    mtsd::Decomposition dec;
    dec.L = MatrixXd::Zero(4, 3);
    dec.X = MatrixXd::Zero(4, 3);
    dec.N = MatrixXd::Zero(4, 3);
    dec.blocks.push_back({0, 3, 1.0, 1.0, 1, true, {}});

    SUBCASE("zero sparse term") {
        const FrameStack e = mtsd::enhance(stack, dec, mtsd::Polarity::DarkShadows);
        for (float v : e.data()) CHECK(v == 0.0F);
    }
    SUBCASE("single dark entry") {
        dec.X(2, 1) = -0.4;
        const FrameStack e = mtsd::enhance(stack, dec, mtsd::Polarity::DarkShadows);
        CHECK(e.at(1, 1, 0) == 1.0F);
        float total = 0;
        for (float v : e.data()) total += v;
        CHECK(total == 1.0F);
        CHECK(e == mtsd::enhance(stack, [&] {
                  auto flipped = dec;
                  flipped.X = -dec.X;
                  return flipped;
              }(), mtsd::Polarity::BrightShadows));
    }
    SUBCASE("shape mismatch") {
        dec.X = MatrixXd::Zero(5, 3);
        CHECK_THROWS_AS(mtsd::enhance(stack, dec, mtsd::Polarity::DarkShadows), std::invalid_argument);
    }
}

TEST_CASE("raw shadow map") {
    const FrameStack s(1, 1, 2, {0.25F, 1.0F});
    const FrameStack dark = mtsd::shadow_map_raw(s, mtsd::Polarity::DarkShadows);
    CHECK(dark.at(0, 0, 0) == 0.75F);
    CHECK(dark.at(0, 0, 1) == 0.0F);
    CHECK(mtsd::shadow_map_raw(s, mtsd::Polarity::BrightShadows) == s);
}
