#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lava {

/// Exponentially weighted second-order statistics of (phi, gamma, y).
/// Every EM quantity is a function of these, so streaming updates are lossless
/// when the forgetting factor is 1.
struct SufficientStats {
  double n = 0.0;           ///< effective sample count
  double forgetting = 1.0;  ///< lambda in (0, 1]
  Eigen::MatrixXd phi_phi;      ///< p x p
  Eigen::MatrixXd gamma_gamma;  ///< K x K
  Eigen::MatrixXd gamma_phi;    ///< K x p
  Eigen::VectorXd phi_y;        ///< p
  Eigen::VectorXd gamma_y;      ///< K
  double yy = 0.0;
  double y_sum = 0.0;

  static SufficientStats zeros(std::size_t nominal_dim, std::size_t latent_dim, double forgetting = 1.0);

  std::size_t nominal_dim() const { return static_cast<std::size_t>(phi_y.size()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(gamma_y.size()); }

  /// Scales by lambda, then adds the rank-one contribution of one sample.
  void add(const Eigen::VectorXd& phi, const Eigen::VectorXd& gamma, double y);
};

SufficientStats update_stats(SufficientStats stats, const Eigen::VectorXd& phi, const Eigen::VectorXd& gamma,
                             double y);

/// Statistics of a whole batch at lambda = 1. Rows of `phi`/`gamma` are samples.
SufficientStats batch_stats(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& gamma, const Eigen::VectorXd& y);

enum class SupportSelection {
  kNone,      ///< only exact-zero and relative-threshold pruning
  kEvidence,  ///< also drop components whose evidence gain is below (1/2) log n
};

struct EmOptions {
  int max_iters = 2000;
  double rel_tol = 1e-9;  ///< relative change of the marginal log-likelihood
  /// Relative change below which EM counts as stalled and components with a
  /// zero optimal variance are removed exactly.
  double stall_tol = 1e-6;
  double prune_tol = 1e-8;  ///< relative to max_j d_j
  int iters_per_sample = 3;
  double ridge_jitter = 1e-8;   ///< times trace(S_phiphi)/p, added when solving for theta
  double sigma2_floor = 1e-12;  ///< times s_yy/n
  SupportSelection selection = SupportSelection::kEvidence;
  int max_selection_rounds = 20;

  void validate() const;
};

/// Per-consumer estimate. Inactive (pruned) components have d = 0 and z = 0.
struct ModelState {
  Eigen::VectorXd theta;           ///< nominal parameters, length p
  Eigen::VectorXd z_hat;           ///< posterior mean of vec(Z), length K
  Eigen::MatrixXd posterior_cov;   ///< P, K x K, zero outside the active block
  Eigen::VectorXd prior_var;       ///< diagonal of D
  double sigma2 = 1.0;
  std::vector<bool> active;
  SufficientStats stats;

  /// theta = 0, D = I, all components active, empty statistics.
  static ModelState initial(std::size_t nominal_dim, std::size_t latent_dim, double sigma2 = 1.0,
                            double forgetting = 1.0);

  std::size_t nominal_dim() const { return static_cast<std::size_t>(theta.size()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(z_hat.size()); }
  std::size_t active_count() const;
  /// Number of non-zero entries of z_hat.
  std::size_t nonzero_count() const;
  std::vector<Eigen::Index> active_indices() const;
};

struct EStepResult {
  Eigen::VectorXd z_hat;
  Eigen::MatrixXd posterior_cov;
};

/// Exact Gaussian posterior of vec(Z) given theta, D, sigma2 and the statistics.
EStepResult e_step(const ModelState& state);

/// Closed-form maximisation given the state's current z_hat / posterior_cov.
ModelState m_step(const ModelState& state, const EmOptions& opts = {});

/// log N(Y; Theta Phi, sigma2 I + Gamma^T D Gamma), evaluated through the
/// K-dimensional matrix-inversion identity.
double marginal_log_likelihood(const SufficientStats& stats, const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& prior_var, double sigma2);
double marginal_log_likelihood(const ModelState& state);

struct FitTrace {
  /// Log-likelihood after every E-step, in evaluation order.
  std::vector<double> loglik;
  /// Positions in `loglik` whose value follows an evidence-based support
  /// selection rather than an EM step.
  std::vector<std::size_t> selection_points;
  int iterations = 0;
  bool converged = false;
};

/// Default starting point: theta = 0, D = I, sigma2 = sample variance of y.
ModelState initial_state(const SufficientStats& stats);

/// Alternates E and M steps until the relative log-likelihood change is below
/// rel_tol. Components under prune_tol * max(d) are dropped every iteration;
/// at stalls, components whose optimal variance is exactly zero are removed.
/// With kEvidence, each converged point is followed by a support selection
/// round and EM restarts from the reduced model.
ModelState em_fit(const SufficientStats& stats, const EmOptions& opts = {}, const ModelState* init = nullptr,
                  FitTrace* trace = nullptr);

/// Adds one sample and runs `iters_per_sample` EM iterations; the returned
/// state's posterior is consistent with its parameters.
ModelState recursive_update(ModelState state, const Eigen::VectorXd& phi, const Eigen::VectorXd& gamma, double y,
                            const EmOptions& opts = {});
/// In-place variant used by the walk-forward loop.
void recursive_update_inplace(ModelState& state, const Eigen::VectorXd& phi, const Eigen::VectorXd& gamma, double y,
                              const EmOptions& opts = {});

/// Leave-one-out relevance of each active component: q_k^2 / s_k. Values
/// <= 1 mean the likelihood is maximised with that component removed.
Eigen::VectorXd relevance_ratios(const ModelState& state);

}  // namespace lava
