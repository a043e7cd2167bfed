#include <doctest.h>

#include <cmath>
#include <complex>

#include "sparspec/bayes.hpp"
#include "sparspec/errors.hpp"
#include "sparspec/scene.hpp"
#include "support/oracles.hpp"

using namespace sparspec;
namespace tst = sparspec::testing;

namespace {

Eigen::MatrixXcd unitary_dft(int n) {
    Eigen::MatrixXcd h(n, n);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m)
            h(k, m) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                 2.0 * std::numbers::pi * k * m / n);
    return h;
}

}  // namespace

TEST_CASE("zero measurement gives a zero estimate and the prior-form variance") {
    Rng rng(31);
    const Eigen::MatrixXcd h = tst::random_complex_matrix(rng, 6, 4);
    const auto prior = DiagonalPrior::uniform(4, 2.0);
    const NoiseModel noise{0.5};
    const PosteriorSummary s = mmse_estimate(h, prior, noise, Eigen::VectorXcd::Zero(6));
    CHECK(s.estimate.norm() == 0.0);
    const Eigen::VectorXd ref = posterior_covariance_diag_ref(h, prior, noise);
    CHECK((s.error_variance_diag - ref).cwiseAbs().maxCoeff() < 1e-10 * ref.maxCoeff());
}

TEST_CASE("scalar case: H=[1], prior 1, noise 1, v=2 -> estimate 1, variance 0.5") {
    Eigen::MatrixXcd h(1, 1);
    h(0, 0) = 1.0;
    Eigen::VectorXcd v(1);
    v(0) = 2.0;
    const PosteriorSummary s =
        mmse_estimate(h, DiagonalPrior::uniform(1, 1.0), NoiseModel{1.0}, v);
    CHECK(std::abs(s.estimate(0) - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(s.error_variance_diag(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("innovation-form and information-form posteriors agree on random instances") {
    Rng rng(37);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_below(31));
        const int m = 2 + static_cast<int>(rng.uniform_below(31));
        const Eigen::MatrixXcd h = tst::random_complex_matrix(rng, k, m);
        DiagonalPrior prior;
        prior.variances = Eigen::VectorXd::NullaryExpr(m, [&](Eigen::Index) {
            return 0.1 + 3.0 * rng.uniform();
        });
        const NoiseModel noise{0.05 + rng.uniform()};
        const Eigen::VectorXd kk = posterior_covariance_diag(h, prior, noise);
        const Eigen::VectorXd mm = posterior_covariance_diag_ref(h, prior, noise);
        REQUIRE((kk - mm).cwiseAbs().maxCoeff() < 1e-10 * mm.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("orthonormal columns reduce the posterior variance to the scalar formula") {
    const Eigen::MatrixXcd h = unitary_dft(8);
    const double sg2 = 2.5, sn2 = 0.4;
    const Eigen::VectorXd diag =
        posterior_covariance_diag(h, DiagonalPrior::uniform(8, sg2), NoiseModel{sn2});
    const double expected = 1.0 / (1.0 / sn2 + 1.0 / sg2);
    for (int m = 0; m < 8; ++m) CHECK(diag(m) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("huge prior variance approaches the prior-free error floor") {
    const Eigen::MatrixXcd h = unitary_dft(8);
    const double sn2 = 1.0;
    const Eigen::VectorXd diag =
        posterior_covariance_diag(h, DiagonalPrior::uniform(8, 1e12), NoiseModel{sn2});
    const Eigen::MatrixXcd limit = sn2 * (h.adjoint() * h).inverse();
    for (int m = 0; m < 8; ++m)
        CHECK(std::abs(diag(m) - limit(m, m).real()) < 1e-4 * limit(m, m).real());
}

TEST_CASE("scalar posterior variance identity") {
    Eigen::MatrixXcd h(3, 1);
    h << std::complex<double>(1 / std::sqrt(3.0), 0), std::complex<double>(0, 1 / std::sqrt(3.0)),
        std::complex<double>(-1 / std::sqrt(3.0), 0);
    const double sg2 = 4.0, sn2 = 0.3;
    const Eigen::VectorXd diag =
        posterior_covariance_diag(h, DiagonalPrior::uniform(1, sg2), NoiseModel{sn2});
    CHECK(diag(0) == doctest::Approx(sg2 * sn2 / (sg2 + sn2)).epsilon(1e-12));
}

TEST_CASE("zero sensing matrix returns the prior as the CRLB") {
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(5, 7);
    DiagonalPrior prior;
    prior.variances =
        Eigen::VectorXd::NullaryExpr(7, [](Eigen::Index i) { return 1.0 + 0.5 * i; });
    const Eigen::VectorXd crlb = bayesian_crlb_diag(h, prior, NoiseModel{0.2});
    CHECK((crlb - prior.variances).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("CRLB equals the posterior variance diagonal on random instances") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXcd h = tst::random_complex_matrix(rng, 5, 9);
        DiagonalPrior prior;
        prior.variances = Eigen::VectorXd::NullaryExpr(9, [&](Eigen::Index) {
            return 0.2 + 2.0 * rng.uniform();
        });
        const NoiseModel noise{0.1 + rng.uniform()};
        const Eigen::VectorXd crlb = bayesian_crlb_diag(h, prior, noise);
        const Eigen::VectorXd post = posterior_covariance_diag(h, prior, noise);
        REQUIRE((crlb - post).cwiseAbs().maxCoeff() < 1e-10 * post.maxCoeff());
    }
}

TEST_CASE("matched filter inverts an orthonormal square system without noise") {
    const Eigen::MatrixXcd h = unitary_dft(8);
    Rng rng(43);
    const Eigen::VectorXcd gamma = tst::random_complex_vector(rng, 8);
    const Eigen::VectorXcd recovered = matched_filter(h, h * gamma);
    CHECK((recovered - gamma).norm() < 1e-10 * gamma.norm());
    CHECK(matched_filter(h, Eigen::VectorXcd::Zero(8)).norm() == 0.0);
}

TEST_CASE("matched filter masks a weak scatterer under a sparse spectrum") {
    const auto& desk = tst::DeskFixture::instance();
    const SensingMatrix h = build_sensing_matrix(desk.support50, desk.fgrid, desk.rgrid);
    // weak scatterer placed on the strong one's worst far sidelobe
    const Eigen::MatrixXcd gram = h.entries.adjoint() * h.entries;
    int weak_bin = -1;
    double worst = -1.0;
    for (int b = 0; b < h.cols(); ++b) {
        if (std::abs(b - 30) <= 5) continue;
        if (std::abs(gram(b, 30)) > worst) {
            worst = std::abs(gram(b, 30));
            weak_bin = b;
        }
    }
    Eigen::VectorXcd gamma = Eigen::VectorXcd::Zero(h.cols());
    gamma(30) = std::polar(std::pow(10.0, 30.0 / 20.0), 0.7);  // 30 dB
    gamma(weak_bin) = std::polar(1.0, -1.1);                   // 0 dB
    const Eigen::VectorXcd mf = matched_filter(h, Eigen::VectorXcd(h.entries * gamma));
    const double est_db = 20.0 * std::log10(std::abs(mf(weak_bin)));
    const double true_db = 20.0 * std::log10(std::abs(gamma(weak_bin)));
    CHECK(std::abs(est_db - true_db) > 3.0);
}

TEST_CASE("estimator is linear in the measurement") {
    Rng rng(47);
    const Eigen::MatrixXcd h = tst::random_complex_matrix(rng, 7, 5);
    const auto prior = DiagonalPrior::uniform(5, 1.5);
    const NoiseModel noise{0.3};
    const Eigen::VectorXcd v1 = tst::random_complex_vector(rng, 7);
    const Eigen::VectorXcd v2 = tst::random_complex_vector(rng, 7);
    const Eigen::VectorXcd sum_est = mmse_estimate(h, prior, noise, v1 + v2).estimate;
    const Eigen::VectorXcd est_sum = mmse_estimate(h, prior, noise, v1).estimate +
                                     mmse_estimate(h, prior, noise, v2).estimate;
    CHECK((sum_est - est_sum).cwiseAbs().maxCoeff() < 1e-12 * sum_est.cwiseAbs().maxCoeff());
}

TEST_CASE("posterior variance never exceeds the prior variance") {
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 1 + static_cast<int>(rng.uniform_below(12));
        const int m = 1 + static_cast<int>(rng.uniform_below(12));
        const Eigen::MatrixXcd h = tst::random_complex_matrix(rng, k, m);
        DiagonalPrior prior;
        prior.variances = Eigen::VectorXd::NullaryExpr(m, [&](Eigen::Index) {
            return 0.2 + 2.0 * rng.uniform();
        });
        const NoiseModel noise{0.05 + rng.uniform()};
        const Eigen::VectorXd post = posterior_covariance_diag(h, prior, noise);
        for (int i = 0; i < m; ++i) {
            REQUIRE(post(i) >= 0.0);
            REQUIRE(post(i) <= prior.variances(i) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("near-singular innovation covariance is rejected") {
    // Two identical rows, vanishing noise: condition blows past the cap.
    Eigen::MatrixXcd h(2, 2);
    h << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(
        mmse_estimate(h, DiagonalPrior::uniform(2, 1e6), NoiseModel{1e-12},
                      Eigen::VectorXcd::Ones(2)),
        NumericalError);
}

TEST_CASE("one-step MMSE attains its own posterior variances on prior-matched scenes") {
    Rng rng(59);
    const Eigen::MatrixXcd h = tst::random_complex_matrix(rng, 12, 8);
    const double sg2 = 2.0;
    const auto prior = DiagonalPrior::uniform(8, sg2);
    const NoiseModel noise{0.4};
    const Eigen::VectorXd predicted = posterior_covariance_diag(h, prior, noise);
    Eigen::VectorXd empirical = Eigen::VectorXd::Zero(8);
    const int trials = 5000;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXcd gamma(8);
        for (int i = 0; i < 8; ++i) gamma(i) = rng.complex_normal(sg2);
        Eigen::VectorXcd v = h * gamma;
        for (int i = 0; i < 12; ++i) v(i) += rng.complex_normal(noise.variance);
        const PosteriorSummary s = mmse_estimate(h, prior, noise, v);
        empirical += (gamma - s.estimate).cwiseAbs2();
    }
    empirical /= trials;
    CHECK(empirical.mean() == doctest::Approx(predicted.mean()).epsilon(0.03));
    for (int i = 0; i < 8; ++i)  // per-bin attainment
        CHECK(empirical(i) == doctest::Approx(predicted(i)).epsilon(0.05));
}
