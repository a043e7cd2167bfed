#include "sparspec/rrmmse.hpp"

#include <chrono>
#include <cmath>

#include "sparspec/errors.hpp"

namespace sparspec {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Per-iteration quantities every solver path must produce.
struct IterationState {
    Eigen::VectorXcd correlations;  // s = H^H A^{-1} v
    Eigen::VectorXd quad_forms;     // q_m = h_m^H A^{-1} h_m
};

class DirectSolver {
public:
    DirectSolver(const Eigen::MatrixXcd& h, const Measurement& v, double noise_variance,
                 double condition_cap)
        : h_(h), v_(v), noise_variance_(noise_variance), condition_cap_(condition_cap) {}

    IterationState compute(const Eigen::VectorXd& prior) {
        const InnovationFactor factor(h_, prior, noise_variance_, condition_cap_);
        IterationState s;
        s.correlations = h_.adjoint() * factor.solve(v_);
        s.quad_forms = factor.quadratic_forms(h_);
        return s;
    }

    void note_absorbed(int) {}

private:
    const Eigen::MatrixXcd& h_;
    const Measurement& v_;
    double noise_variance_;
    double condition_cap_;
};

/// Factors B = sigma_gamma^2 H H^H + sigma_n^2 I once; the running prior
/// differs from flat only on support bins, so A = B + H_S Delta H_S^H and
/// A^{-1} follows from the capacitance identity
///   A^{-1} = B^{-1} - B^{-1} H_S Delta (I + G Delta)^{-1} H_S^H B^{-1},
/// with G = H_S^H B^{-1} H_S. The Delta-free form stays valid when prior
/// entries have not moved yet (Delta = 0).
class CachedSolver {
public:
    CachedSolver(const Eigen::MatrixXcd& h, const Measurement& v, double noise_variance,
                 double flat_variance, double condition_cap)
        : h_(h), flat_variance_(flat_variance) {
        const int k = static_cast<int>(h.rows());
        const int m = static_cast<int>(h.cols());
        Eigen::MatrixXcd base = Eigen::MatrixXcd::Zero(k, k);
        base.selfadjointView<Eigen::Lower>().rankUpdate(h * std::sqrt(flat_variance));
        base.diagonal().array() += noise_variance;
        llt_.compute(base);
        if (llt_.info() != Eigen::Success || llt_.rcond() < 1.0 / condition_cap)
            throw NumericalError("ill-conditioned innovation covariance");
        base_solve_v_ = llt_.solve(v);
        const Eigen::MatrixXcd y = llt_.matrixL().solve(h);
        base_quad_forms_ = y.colwise().squaredNorm().real().transpose();
        corr_base_ = h.adjoint() * base_solve_v_;
        t_ = Eigen::MatrixXcd(m, 0);
        gram_ = Eigen::MatrixXcd(0, 0);
        pv_ = Eigen::VectorXcd(0);
        support_.reserve(static_cast<std::size_t>(m));
    }

    IterationState compute(const Eigen::VectorXd& prior) {
        const int i = static_cast<int>(support_.size());
        IterationState s;
        if (i == 0) {
            s.correlations = corr_base_;
            s.quad_forms = base_quad_forms_;
            return s;
        }
        Eigen::VectorXd delta(i);
        for (int j = 0; j < i; ++j)
            delta(j) = prior(support_[static_cast<std::size_t>(j)]) - flat_variance_;
        // F = Delta (I + G Delta)^{-1}
        Eigen::MatrixXcd cap = gram_ * delta.asDiagonal();
        cap.diagonal().array() += 1.0;
        const Eigen::MatrixXcd f = delta.asDiagonal() * cap.partialPivLu().solve(
                                                            Eigen::MatrixXcd::Identity(i, i));
        s.correlations = corr_base_ - t_ * (f * pv_);
        const Eigen::MatrixXcd tf = t_ * f;
        const Eigen::VectorXd correction =
            tf.cwiseProduct(t_.conjugate()).rowwise().sum().real();
        s.quad_forms = base_quad_forms_ - correction;
        return s;
    }

    void note_absorbed(int bin) {
        const Eigen::VectorXcd col = llt_.solve(h_.col(bin));  // B^{-1} h_new
        const int i = static_cast<int>(support_.size());
        t_.conservativeResize(Eigen::NoChange, i + 1);
        t_.col(i) = h_.adjoint() * col;
        gram_.conservativeResize(i + 1, i + 1);
        for (int j = 0; j < i; ++j) {
            // G = H_S^H B^{-1} H_S; new column against existing support bins
            gram_(j, i) = t_(support_[static_cast<std::size_t>(j)], i);
            gram_(i, j) = std::conj(gram_(j, i));
        }
        gram_(i, i) = t_(bin, i);
        pv_.conservativeResize(i + 1);
        pv_(i) = h_.col(bin).dot(base_solve_v_);  // h_new^H B^{-1} v
        support_.push_back(bin);
    }

private:
    const Eigen::MatrixXcd& h_;
    double flat_variance_;
    Eigen::LLT<Eigen::MatrixXcd> llt_;
    Eigen::VectorXcd base_solve_v_;   // B^{-1} v
    Eigen::VectorXd base_quad_forms_; // h^H B^{-1} h per column
    Eigen::VectorXcd corr_base_;      // H^H B^{-1} v
    Eigen::MatrixXcd t_;              // H^H B^{-1} H_S
    Eigen::MatrixXcd gram_;           // H_S^H B^{-1} H_S
    Eigen::VectorXcd pv_;             // H_S^H B^{-1} v
    std::vector<int> support_;
};

int argmax_candidate(const Eigen::VectorXd& prior, const Eigen::VectorXcd& correlations,
                     const SupportSet& support, double* magnitude) {
    int best = -1;
    double best_mag = -1.0;
    for (int m = 0; m < static_cast<int>(prior.size()); ++m) {
        if (support.contains(m)) continue;
        const double mag = prior(m) * std::abs(correlations(m));
        if (mag > best_mag) {  // strict: ties resolve to the lowest index
            best_mag = mag;
            best = m;
        }
    }
    if (magnitude != nullptr) *magnitude = best_mag;
    return best;
}

template <class Solver>
EstimationResult run_loop(Solver& solver, const Eigen::MatrixXcd& h, const RrmmseConfig& config) {
    const int m = static_cast<int>(h.cols());
    const int k = static_cast<int>(h.rows());
    const int g_max = config.max_iterations > 0 ? config.max_iterations : k;
    const int cap = std::min(g_max, m);
    const int rank_bound = std::min(k, m);

    EstimationResult result{Eigen::VectorXcd::Zero(m), SupportSet(m), Eigen::VectorXd::Zero(m),
                            {}, Termination::kMaxIterations, false};
    Eigen::VectorXd prior = Eigen::VectorXd::Constant(m, config.prior_variance);
    double trace_prev = config.prior_variance;  // Tr(K_gamma^(0))/M

    for (int iteration = 1; iteration <= cap; ++iteration) {
        const double t_start = now_seconds();
        const IterationState state = solver.compute(prior);

        IterationRecord record;
        record.chosen_index = argmax_candidate(prior, state.correlations, result.support,
                                               &record.chosen_magnitude);
        result.support.insert(record.chosen_index);
        solver.note_absorbed(record.chosen_index);

        // Posterior and estimate under the prior in effect this iteration.
        // Roundoff can push a fully collapsed bin's variance a hair below
        // zero; the floor keeps the next prior strictly positive.
        result.posterior_variance_diag =
            (prior.array() - prior.array().square() * state.quad_forms.array()).cwiseMax(0.0);
        result.estimate = prior.asDiagonal() * state.correlations;
        const double trace = result.posterior_variance_diag.mean();
        record.trace_over_m = trace;

        for (int bin : result.support.insertion_order())
            prior(bin) = std::norm(result.estimate(bin)) + result.posterior_variance_diag(bin);

        record.seconds = now_seconds() - t_start;
        result.trace_history.push_back(record);
        if (iteration > rank_bound) result.rank_warning = true;

        if ((trace_prev - trace) / trace_prev < config.tolerance) {
            result.termination = Termination::kPlateau;
            break;
        }
        trace_prev = trace;
    }
    return result;
}

}  // namespace

void RrmmseConfig::validate() const {
    if (!(prior_variance > 0.0)) throw ConfigError("rrmmse: prior_variance must be > 0");
    if (!(tolerance > 0.0)) throw ConfigError("rrmmse: tolerance must be > 0");
    if (max_iterations < 0) throw ConfigError("rrmmse: max_iterations must be >= 0");
    if (!(condition_cap > 0.0)) throw ConfigError("rrmmse: condition_cap must be > 0");
}

SupportSet::SupportSet(int bin_count) : member_(static_cast<std::size_t>(bin_count), 0) {
    if (bin_count < 1) throw ConfigError("support set: bin count must be positive");
}

void SupportSet::insert(int bin) {
    if (bin < 0 || bin >= bin_count()) throw ConfigError("support set: bin out of range");
    if (member_[static_cast<std::size_t>(bin)]) throw ConfigError("support set: bin already present");
    member_[static_cast<std::size_t>(bin)] = 1;
    order_.push_back(bin);
}

std::vector<int> SupportSet::sorted() const {
    std::vector<int> s = order_;
    std::sort(s.begin(), s.end());
    return s;
}

const char* to_string(Termination t) {
    return t == Termination::kPlateau ? "plateau" : "max_iterations";
}

std::pair<int, double> score_candidates(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                                        const NoiseModel& noise, const Measurement& v,
                                        const SupportSet& support, double condition_cap) {
    prior.validate();
    noise.validate();
    if (prior.variances.size() != h.cols())
        throw ConfigError("prior length does not match the sensing-matrix column count");
    if (support.bin_count() != h.cols())
        throw ConfigError("support set does not match the sensing-matrix column count");
    if (support.size() >= h.cols()) throw ConfigError("no candidates");
    const InnovationFactor factor(h, prior.variances, noise.variance, condition_cap);
    const Eigen::VectorXcd correlations = h.adjoint() * factor.solve(v);
    double magnitude = 0.0;
    const int best = argmax_candidate(prior.variances, correlations, support, &magnitude);
    return {best, magnitude};
}

DiagonalPrior update_prior(const DiagonalPrior& prior, const SupportSet& support,
                           const Eigen::VectorXcd& estimate, const Eigen::VectorXd& posterior_diag,
                           double flat_variance) {
    if ((posterior_diag.array() < 0.0).any())
        throw ConfigError("update_prior: posterior variances must be nonnegative");
    DiagonalPrior out;
    out.variances = Eigen::VectorXd::Constant(prior.variances.size(), flat_variance);
    for (int bin : support.insertion_order())
        out.variances(bin) = std::norm(estimate(bin)) + posterior_diag(bin);
    return out;
}

EstimationResult run_rrmmse(const Eigen::MatrixXcd& h, const Measurement& v,
                            const NoiseModel& noise, const RrmmseConfig& config, SolverPath path) {
    config.validate();
    noise.validate();
    if (h.rows() < 1) throw ConfigError("rrmmse: empty sensing matrix");
    if (v.size() != h.rows())
        throw ConfigError("measurement length does not match the sensing-matrix row count");

    if (path == SolverPath::kCached) {
        CachedSolver solver(h, v, noise.variance, config.prior_variance, config.condition_cap);
        return run_loop(solver, h, config);
    }
    DirectSolver solver(h, v, noise.variance, config.condition_cap);
    return run_loop(solver, h, config);
}

ComplexityEstimate complexity_model(int iterations, int bins, int preserved) {
    if (iterations < 1 || bins < 1 || preserved < 1)
        throw ConfigError("complexity model: arguments must be positive");
    const auto g = static_cast<std::int64_t>(iterations);
    const auto m = static_cast<std::int64_t>(bins);
    const auto k = static_cast<std::int64_t>(preserved);
    ComplexityEstimate est;
    est.dominant = g * g * m * k * k;
    est.full = g * k * k * k + est.dominant;
    return est;
}

}  // namespace sparspec
