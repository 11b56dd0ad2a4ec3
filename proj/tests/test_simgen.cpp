#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabsel/diagnostics.hpp"
#include "stabsel/errors.hpp"
#include "stabsel/simgen.hpp"
#include "stabsel/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace stabsel;

namespace {

DesignSpec spec_of(DesignKind kind, Index n, Index p, double rho = 0.0) {
    DesignSpec s;
    s.kind = kind;
    s.n = n;
    s.p = p;
    s.rho = rho;
    return s;
}

// plain Pearson correlation, independent of the library helpers
double pearson(const Vector& a, const Vector& b) {
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    return ca.dot(cb) / (ca.norm() * cb.norm());
}

std::vector<double> sorted_column(const Matrix& x, Index k) {
    std::vector<double> v(x.col(static_cast<Eigen::Index>(k)).data(), x.col(static_cast<Eigen::Index>(k)).data() + x.rows());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_SUITE("designs") {
    TEST_CASE("presets") {
        CHECK(design_preset("A").p == 1000);
        CHECK(design_preset("A-desk").n == 100);
        CHECK(design_preset("C-desk").rho == 0.99);
        CHECK(design_preset("E").factors == 10);
        CHECK(design_preset("two-correlated").kind == DesignKind::two_correlated);
        CHECK_THROWS_AS(design_preset("Z"), ConfigError);
        CHECK(design_preset_names().size() >= 16);
    }

    TEST_CASE("generated columns have unit norm") {
        Rng rng = make_rng(1);
        const Dataset d = gen_design(design_preset("D-desk"), rng);
        CHECK(d.n() == 100);
        CHECK(d.p() == 200);
        for (Index k = 0; k < d.p(); ++k) CHECK(std::abs(d.x().col(static_cast<Eigen::Index>(k)).norm() - 1.0) <= 1e-10);
    }

    TEST_CASE("independent columns are nearly uncorrelated") {
        Rng rng = make_rng(2);
        const Index n = 4000;
        const Matrix x = gen_design_raw(spec_of(DesignKind::independent, n, 10), rng);
        for (Index j = 0; j < 10; ++j)
            for (Index k = j + 1; k < 10; ++k) CHECK(std::abs(pearson(x.col(j), x.col(k))) <= 3.0 / std::sqrt(n));
    }

    TEST_CASE("block design correlations") {
        Rng rng = make_rng(3);
        const Matrix x = gen_design_raw(spec_of(DesignKind::block, 10000, 30), rng);
        for (Index j = 0; j < 30; ++j)
            for (Index k = j + 1; k < 30; ++k) {
                const double target = j % 10 == k % 10 ? 0.5 : 0.0;
                CHECK(std::abs(pearson(x.col(j), x.col(k)) - target) <= 0.05);
            }
    }

    TEST_CASE("two correlated variables") {
        Rng rng = make_rng(4);
        const Matrix x = gen_design_raw(spec_of(DesignKind::two_correlated, 10000, 6, 0.7), rng);
        CHECK(std::abs(pearson(x.col(0), x.col(2)) - 0.7) <= 0.03);
        CHECK(std::abs(pearson(x.col(1), x.col(2)) - 0.7) <= 0.03);
        CHECK(std::abs(pearson(x.col(0), x.col(1))) <= 0.03);
        CHECK(std::abs(pearson(x.col(3), x.col(4))) <= 0.03);
        CHECK_THROWS_AS(spec_of(DesignKind::two_correlated, 100, 6, 0.75).validate(), ConfigError);
    }

    TEST_CASE("toeplitz population correlations") {
        const Matrix x = population_design(spec_of(DesignKind::toeplitz, 6, 6, 0.99));
        const Matrix gram = x.transpose() * x;
        for (Index j = 0; j < 6; ++j)
            for (Index k = 0; k < 6; ++k)
                CHECK(std::abs(gram(j, k) - std::pow(0.99, std::abs(static_cast<double>(j) - static_cast<double>(k)))) <=
                      1e-12);
    }

    TEST_CASE("population design of the two-correlated case gives IRC 2 rho") {
        const Matrix x = population_design(spec_of(DesignKind::two_correlated, 8, 8, 0.65));
        CHECK(irrepresentable(x, {0, 1}, std::vector<int>{1, 1}).value == doctest::Approx(1.3).epsilon(1e-12));
    }

    TEST_CASE("fixed seed reproduces the design") {
        Rng a = make_rng(9);
        Rng b = make_rng(9);
        CHECK(gen_design(design_preset("E-desk"), a).x() == gen_design(design_preset("E-desk"), b).x());
    }
}

TEST_SUITE("coefficients and responses") {
    TEST_CASE("support sizes") {
        Rng rng = make_rng(5);
        const SimTruth full = gen_beta(20, 20, BetaDist::std_normal, rng);
        CHECK((full.beta.array() != 0.0).count() == 20);
        const SimTruth none = gen_beta(20, 0, BetaDist::uniform01, rng);
        CHECK(none.beta.isZero(0.0));
        CHECK(none.support.empty());
        const SimTruth some = gen_beta(50, 7, BetaDist::uniform01, rng);
        CHECK(some.support.size() == 7);
        CHECK(std::is_sorted(some.support.begin(), some.support.end()));
        CHECK_THROWS_AS(gen_beta(5, 6, BetaDist::uniform01, rng), ConfigError);
    }

    TEST_CASE("uniform coefficients have the right mean") {
        Rng rng = make_rng(6);
        const SimTruth t = gen_beta(10000, 10000, BetaDist::uniform01, rng);
        CHECK(t.beta.minCoeff() >= 0.0);
        CHECK(t.beta.maxCoeff() <= 1.0);
        CHECK(std::abs(t.beta.mean() - 0.5) <= 0.02);
    }

    TEST_CASE("noiseless response") {
        Rng rng = make_rng(7);
        const Dataset d = gen_design(design_preset("A-desk"), rng);
        SimTruth t = gen_beta(d.p(), 5, BetaDist::uniform01, rng);
        const Dataset y = gen_response(d, t, std::numeric_limits<double>::infinity(), rng);
        CHECK((y.y() - d.x() * t.beta).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("noise scale follows the snr definition") {
        Rng rng = make_rng(8);
        const Dataset d = gen_design(design_preset("B-desk"), rng);
        SimTruth t = gen_beta(d.p(), 5, BetaDist::uniform01, rng);
        gen_response(d, t, 2.0, rng);
        CHECK((d.x() * t.beta).squaredNorm() / (t.sigma * t.sigma) == doctest::Approx(2.0).epsilon(1e-12));
    }

    TEST_CASE("per-observation noise variance is sigma^2 / n") {
        const Index n = 50;
        Matrix x = Matrix::Zero(n, 3);
        for (Index k = 0; k < 3; ++k) x(k, k) = 1.0;
        const Dataset d(x);
        SimTruth t;
        t.beta = Vector::Zero(3);
        t.beta(0) = 1.0;
        t.support = {0};
        const double snr = 0.25;  // sigma^2 = 1 / snr = 4
        Rng rng = make_rng(10);
        double ss = 0.0;
        Index count = 0;
        for (int rep = 0; rep < 400; ++rep) {
            const Dataset y = gen_response(d, t, snr, rng);
            const Vector e = y.y() - x.col(0);
            ss += e.squaredNorm();
            count += n;
        }
        CHECK(ss / static_cast<double>(count) == doctest::Approx(4.0 / n).epsilon(0.05));
    }
}

TEST_SUITE("graphical models") {
    TEST_CASE("identity precision") {
        Rng rng = make_rng(11);
        const Matrix s = sample_covariance(gen_ggm(Matrix::Identity(4, 4), 20000, rng).x());
        CHECK((s - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 0.05);
    }

    TEST_CASE("banded precision edges") {
        const Matrix theta = banded_precision(10, 1, 0.4);
        Index edges = 0;
        for (Index j = 0; j < 10; ++j)
            for (Index k = j + 1; k < 10; ++k) {
                edges += theta(j, k) != 0.0;
                if (theta(j, k) != 0.0) CHECK(k == j + 1);
            }
        CHECK(edges == 9);
    }

    TEST_CASE("large-sample precision recovers theta") {
        Rng rng = make_rng(12);
        const Matrix theta = banded_precision(5, 1, 0.4);
        const Matrix est = sample_covariance(gen_ggm(theta, 100000, rng).x()).inverse();
        for (Index j = 0; j < 5; ++j)
            for (Index k = 0; k < 5; ++k) {
                if (theta(j, k) != 0.0)
                    CHECK(std::abs(est(j, k) - theta(j, k)) <= 0.05 * std::abs(theta(j, k)));
                else
                    CHECK(std::abs(est(j, k)) <= 0.02);
            }
    }
}

TEST_SUITE("permutation nulls") {
    TEST_CASE("per-column permutation keeps every marginal") {
        Rng rng = make_rng(13);
        const Dataset d = gen_design(design_preset("B-desk"), rng);
        const Dataset perm = permute_null(d, PermuteMode::per_column, {}, rng);
        CHECK(perm.x() != d.x());
        for (Index k = 0; k < d.p(); k += 7) CHECK(sorted_column(perm.x(), k) == sorted_column(d.x(), k));
    }

    TEST_CASE("shared permutation keeps the cross products among permuted columns") {
        Rng rng = make_rng(14);
        const Dataset d = gen_design(design_preset("E-desk"), rng);
        const Dataset perm = permute_null(d, PermuteMode::shared_except_k, {0}, rng);
        CHECK(perm.x().col(0) == d.x().col(0));
        const Matrix before = d.x().rightCols(199).transpose() * d.x().rightCols(199);
        const Matrix after = perm.x().rightCols(199).transpose() * perm.x().rightCols(199);
        CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-12);
    }

    TEST_CASE("keeping every column is the identity") {
        Rng rng = make_rng(15);
        const Dataset d = gen_design(design_preset("A-desk"), rng);
        std::vector<Index> all(d.p());
        for (Index k = 0; k < d.p(); ++k) all[k] = k;
        CHECK(permute_null(d, PermuteMode::per_column, all, rng).x() == d.x());
        CHECK(permute_null(d, PermuteMode::shared_except_k, all, rng).x() == d.x());
    }
}
