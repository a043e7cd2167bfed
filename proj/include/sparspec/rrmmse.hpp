#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sparspec/bayes.hpp"
#include "sparspec/grid.hpp"

namespace sparspec {

struct RrmmseConfig {
    double prior_variance = 5e3;  // sigma_gamma^2 for bins outside the support
    double tolerance = 1e-3;      // eta, relative trace-decrease threshold
    int max_iterations = 0;       // G_max; 0 selects the default K
    double condition_cap = kDefaultConditionCap;

    void validate() const;
};

/// Ordered set of range bins; insertion order is kept for audit.
class SupportSet {
public:
    explicit SupportSet(int bin_count);

    void insert(int bin);
    bool contains(int bin) const { return member_[static_cast<std::size_t>(bin)] != 0; }
    int size() const { return static_cast<int>(order_.size()); }
    int bin_count() const { return static_cast<int>(member_.size()); }
    const std::vector<int>& insertion_order() const { return order_; }
    std::vector<int> sorted() const;

private:
    std::vector<int> order_;
    std::vector<std::uint8_t> member_;
};

struct IterationRecord {
    int chosen_index = -1;        // range bin absorbed this iteration
    double chosen_magnitude = 0;  // |gamma_hat| of the winning candidate
    double trace_over_m = 0;      // Tr(K_eps)/M after this iteration
    double seconds = 0;           // wall time of this iteration
};

using IterationTrace = std::vector<IterationRecord>;

enum class Termination { kPlateau, kMaxIterations };

const char* to_string(Termination t);

struct EstimationResult {
    Eigen::VectorXcd estimate;               // full-M MMSE of the final iteration
    SupportSet support;                      // grown support, insertion-ordered
    Eigen::VectorXd posterior_variance_diag;
    IterationTrace trace_history;
    Termination termination = Termination::kMaxIterations;
    bool rank_warning = false;  // iterations exceeded min(K, M)
};

/// Iteration linear algebra. kDirect re-factorizes the K x K innovation each
/// iteration (the reference cost model); kCached factorizes the flat-prior
/// innovation once and applies the support's low-rank prior correction
/// through a capacitance solve. Both produce the same results (tests pin
/// trace agreement at 1e-8 and identical support orders).
enum class SolverPath { kDirect, kCached };

/// One scoring pass of the support-growth loop: shares a single innovation
/// solve z = A^{-1} v across candidates and returns the bin outside
/// `support` maximizing |sigma_m^2 h_m^H z|, ties to the lowest index.
std::pair<int, double> score_candidates(const Eigen::MatrixXcd& h, const DiagonalPrior& prior,
                                        const NoiseModel& noise, const Measurement& v,
                                        const SupportSet& support,
                                        double condition_cap = kDefaultConditionCap);

/// Prior refresh: support bins get |gamma_hat|^2 + posterior variance,
/// everything else the flat sigma_gamma^2.
DiagonalPrior update_prior(const DiagonalPrior& prior, const SupportSet& support,
                           const Eigen::VectorXcd& estimate, const Eigen::VectorXd& posterior_diag,
                           double flat_variance);

/// Support-growing reduced-rank MMSE estimator. Grows the support one bin
/// per iteration, refreshes the prior from the running estimate and its
/// posterior variance, and stops when the relative decrease of Tr(K_eps)/M
/// falls below the tolerance or the iteration cap min(G_max, M) is reached.
EstimationResult run_rrmmse(const Eigen::MatrixXcd& h, const Measurement& v,
                            const NoiseModel& noise, const RrmmseConfig& config,
                            SolverPath path = SolverPath::kDirect);

inline EstimationResult run_rrmmse(const SensingMatrix& h, const Measurement& v,
                                   const NoiseModel& noise, const RrmmseConfig& config,
                                   SolverPath path = SolverPath::kDirect) {
    return run_rrmmse(h.entries, v, noise, config, path);
}

/// Flop-count model of the whole run: full = G K^3 + G^2 M K^2 and the
/// dominant term G^2 M K^2, for reporting next to measured wall time.
struct ComplexityEstimate {
    std::int64_t full = 0;
    std::int64_t dominant = 0;
};

ComplexityEstimate complexity_model(int iterations, int bins, int preserved);

}  // namespace sparspec
