#include "sparspec/bayes.hpp"

#include "sparspec/errors.hpp"

namespace sparspec {

namespace {

void check_dims(const Eigen::MatrixXcd& h, const DiagonalPrior& prior, const NoiseModel& noise) {
    prior.validate();
    noise.validate();
    if (prior.variances.size() != h.cols())
        throw ConfigError("prior length does not match the sensing-matrix column count");
}

}  // namespace

DiagonalPrior DiagonalPrior::uniform(int bins, double variance) {
    DiagonalPrior p;
    p.variances = Eigen::VectorXd::Constant(bins, variance);
    p.validate();
    return p;
}

void DiagonalPrior::validate() const {
    if (variances.size() == 0) throw ConfigError("prior: empty variance vector");
    if ((variances.array() <= 0.0).any())
        throw ConfigError("prior: all variances must be strictly positive");
}

void NoiseModel::validate() const {
    if (!(variance > 0.0)) throw ConfigError("noise: variance must be strictly positive");
}

InnovationFactor::InnovationFactor(const Eigen::MatrixXcd& h, const Eigen::VectorXd& prior_variances,
                                   double noise_variance, double condition_cap) {
    const Eigen::MatrixXcd scaled = h * prior_variances.cwiseSqrt().asDiagonal();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(h.rows(), h.rows());
    a.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    a.diagonal().array() += noise_variance;
    llt_.compute(a);
    if (llt_.info() != Eigen::Success || llt_.rcond() < 1.0 / condition_cap)
        throw NumericalError("ill-conditioned innovation covariance");
}

Eigen::VectorXcd InnovationFactor::solve(const Eigen::VectorXcd& rhs) const {
    return llt_.solve(rhs);
}

Eigen::VectorXd InnovationFactor::quadratic_forms(const Eigen::MatrixXcd& h) const {
    const Eigen::MatrixXcd y = llt_.matrixL().solve(h);
    return y.colwise().squaredNorm().real().transpose();
}

namespace {

bool cancellation_regime(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                         const NoiseModel& noise) {
    return prior.variances.maxCoeff() / noise.variance > 1e8 && h.cols() <= 256;
}

Eigen::VectorXd diag_from_factor(const InnovationFactor& factor, const Eigen::MatrixXcd& h,
                                 const DiagonalPrior& prior) {
    const Eigen::VectorXd q = factor.quadratic_forms(h);
    return prior.variances.array() - prior.variances.array().square() * q.array();
}

}  // namespace

PosteriorSummary mmse_estimate(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                               const NoiseModel& noise, const Measurement& v,
                               double condition_cap) {
    check_dims(h, prior, noise);
    if (v.size() != h.rows())
        throw ConfigError("measurement length does not match the sensing-matrix row count");
    const InnovationFactor factor(h, prior.variances, noise.variance, condition_cap);
    const Eigen::VectorXcd z = factor.solve(v);
    PosteriorSummary out;
    out.estimate = prior.variances.asDiagonal() * (h.adjoint() * z);
    out.error_variance_diag = cancellation_regime(h, prior, noise)
                                  ? posterior_covariance_diag_ref(h, prior, noise)
                                  : diag_from_factor(factor, h, prior);
    out.trace_over_m = out.error_variance_diag.mean();
    return out;
}

Eigen::VectorXd posterior_covariance_diag(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                                          const NoiseModel& noise, double condition_cap) {
    check_dims(h, prior, noise);
    if (cancellation_regime(h, prior, noise)) return posterior_covariance_diag_ref(h, prior, noise);
    const InnovationFactor factor(h, prior.variances, noise.variance, condition_cap);
    return diag_from_factor(factor, h, prior);
}

Eigen::VectorXd posterior_covariance_diag_ref(const Eigen::MatrixXcd& h,
                                              const DiagonalPrior& prior,
                                              const NoiseModel& noise) {
    check_dims(h, prior, noise);
    const auto m = h.cols();
    if (m > 256) throw ConfigError("reference posterior diagonal limited to M <= 256");
    Eigen::MatrixXcd info = (h.adjoint() * h) / noise.variance;
    info.diagonal() += prior.variances.cwiseInverse().cast<std::complex<double>>();
    const Eigen::MatrixXcd cov = info.llt().solve(Eigen::MatrixXcd::Identity(m, m));
    return cov.diagonal().real();
}

Eigen::VectorXd bayesian_crlb_diag(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                                   const NoiseModel& noise, double condition_cap) {
    check_dims(h, prior, noise);
    if (h.cols() <= 256) return posterior_covariance_diag_ref(h, prior, noise);
    const InnovationFactor factor(h, prior.variances, noise.variance, condition_cap);
    return diag_from_factor(factor, h, prior);
}

Eigen::VectorXcd matched_filter(const Eigen::MatrixXcd& h, const Measurement& v) {
    if (v.size() != h.rows())
        throw ConfigError("measurement length does not match the sensing-matrix row count");
    return h.adjoint() * v;
}

}  // namespace sparspec
