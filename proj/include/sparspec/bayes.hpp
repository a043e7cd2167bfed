#pragma once

#include <Eigen/Dense>

#include "sparspec/grid.hpp"

namespace sparspec {

/// Per-bin a-priori variances of the reflection coefficients (diagonal of
/// the prior covariance). All entries strictly positive.
struct DiagonalPrior {
    Eigen::VectorXd variances;

    static DiagonalPrior uniform(int bins, double variance);
    void validate() const;
};

/// White measurement noise, covariance sigma_n^2 * I.
struct NoiseModel {
    double variance = 0.0;

    void validate() const;
};

using Measurement = Eigen::VectorXcd;

struct PosteriorSummary {
    Eigen::VectorXcd estimate;            // gamma hat, length M
    Eigen::VectorXd error_variance_diag;  // diag of the posterior error covariance
    double trace_over_m = 0.0;
};

inline constexpr double kDefaultConditionCap = 1e12;

/// Cholesky factor of the innovation covariance H K_gamma H^H + sigma_n^2 I,
/// with a reciprocal-condition guard. Solves go through the factor; the
/// explicit inverse is never formed.
class InnovationFactor {
public:
    InnovationFactor(const Eigen::MatrixXcd& h, const Eigen::VectorXd& prior_variances,
                     double noise_variance, double condition_cap = kDefaultConditionCap);

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    /// q_m = h_m^H A^{-1} h_m for every column of `h`.
    Eigen::VectorXd quadratic_forms(const Eigen::MatrixXcd& h) const;
    const Eigen::LLT<Eigen::MatrixXcd>& llt() const { return llt_; }

private:
    Eigen::LLT<Eigen::MatrixXcd> llt_;
};

/// MMSE estimate and posterior summary through the K x K innovation solve.
PosteriorSummary mmse_estimate(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                               const NoiseModel& noise, const Measurement& v,
                               double condition_cap = kDefaultConditionCap);

/// Diagonal of the posterior error covariance. Production route is the
/// K x K innovation solve; when M <= 256 and max(prior)/noise exceeds 1e8
/// the M x M information form is used instead, because the K x K form loses
/// the diagonal to cancellation in that regime.
Eigen::VectorXd posterior_covariance_diag(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                                          const NoiseModel& noise,
                                          double condition_cap = kDefaultConditionCap);

/// M x M information-form reference: diag((H^H K_n^{-1} H + K_gamma^{-1})^{-1}).
/// Slow; intended for tests and small M (hard cap 256).
Eigen::VectorXd posterior_covariance_diag_ref(const Eigen::MatrixXcd& h,
                                              const DiagonalPrior& prior,
                                              const NoiseModel& noise);

/// Bayesian CRLB per bin, reference M x M route when M <= 256, otherwise the
/// K x K route (the two agree; tests pin the agreement).
Eigen::VectorXd bayesian_crlb_diag(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                                   const NoiseModel& noise,
                                   double condition_cap = kDefaultConditionCap);

/// Back-projection H^H v.
Eigen::VectorXcd matched_filter(const Eigen::MatrixXcd& h, const Measurement& v);

inline Eigen::VectorXcd matched_filter(const SensingMatrix& h, const Measurement& v) {
    return matched_filter(h.entries, v);
}

}  // namespace sparspec
