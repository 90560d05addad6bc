#include "lava/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lava/errors.hpp"

namespace lava {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Posterior of the active latent block plus the log-likelihood at the same
// parameters. All vectors are indexed by position in `idx`.
struct Posterior {
  std::vector<Index> idx;
  MatrixXd gram;  // S_gamma_gamma restricted to the active set
  VectorXd b;     // s_gamma_y - S_gamma_phi theta, active rows
  VectorXd z;
  MatrixXd cov;
  double loglik = 0.0;
};

double residual_energy(const SufficientStats& s, const VectorXd& theta) {
  return s.yy - 2.0 * theta.dot(s.phi_y) + theta.dot(s.phi_phi * theta);
}

Posterior compute_posterior(const ModelState& st) {
  const SufficientStats& ss = st.stats;
  Posterior post;
  post.idx = st.active_indices();
  const auto k = static_cast<Index>(post.idx.size());
  const double s2 = st.sigma2;
  if (!(s2 > 0.0) || !std::isfinite(s2)) throw NumericError("noise variance must be positive and finite");

  double logdet = 0.0;
  double quad = 0.0;
  if (k > 0) {
    post.gram = ss.gamma_gamma(post.idx, post.idx);
    post.b = ss.gamma_y(post.idx) - ss.gamma_phi(post.idx, Eigen::all) * st.theta;
    const VectorXd h = st.prior_var(post.idx).cwiseMax(0.0).cwiseSqrt();

    // B = I + D^{1/2} S D^{1/2} / sigma2 stays well conditioned as d_k -> 0.
    MatrixXd B = (h * h.transpose()).cwiseProduct(post.gram) / s2;
    B.diagonal().array() += 1.0;
    Eigen::LLT<MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw NumericError("posterior system is not positive definite");

    const MatrixXd w = llt.matrixL().solve(MatrixXd(h.asDiagonal()));
    post.cov.noalias() = w.transpose() * w;
    post.z.noalias() = post.cov * post.b / s2;
    logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    quad = post.b.dot(post.z) / s2;
  } else {
    post.gram.resize(0, 0);
    post.b.resize(0);
    post.z.resize(0);
    post.cov.resize(0, 0);
  }

  if (ss.n > 0.0) {
    const double rr = residual_energy(ss, st.theta);
    post.loglik = -0.5 * (ss.n * std::log(2.0 * std::numbers::pi) + ss.n * std::log(s2) + logdet + rr / s2 - quad);
  }
  if (!std::isfinite(post.loglik) || !post.z.allFinite()) throw NumericError("non-finite posterior");
  return post;
}

void scatter_posterior(ModelState& st, const Posterior& post) {
  st.z_hat.setZero();
  st.posterior_cov.setZero();
  const auto k = static_cast<Index>(post.idx.size());
  for (Index a = 0; a < k; ++a) {
    st.z_hat[post.idx[a]] = post.z[a];
    for (Index b = 0; b < k; ++b) st.posterior_cov(post.idx[a], post.idx[b]) = post.cov(a, b);
  }
}

void m_step_inplace(ModelState& st, const Posterior& post, const EmOptions& opts) {
  const SufficientStats& ss = st.stats;
  const Index p = st.theta.size();

  VectorXd rhs = ss.phi_y;
  if (!post.idx.empty()) rhs.noalias() -= ss.gamma_phi(post.idx, Eigen::all).transpose() * post.z;
  if (p > 0) {
    MatrixXd A = ss.phi_phi;
    const double tr = A.trace();
    const double jitter = opts.ridge_jitter * (tr > 0.0 ? tr / static_cast<double>(p) : 1.0);
    A.diagonal().array() += jitter;
    Eigen::LDLT<MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw NumericError("nominal normal equations are singular");
    st.theta = ldlt.solve(rhs);
    if (!st.theta.allFinite()) throw NumericError("nominal normal equations are singular");
  }

  st.prior_var.setZero();
  for (std::size_t a = 0; a < post.idx.size(); ++a) {
    const auto ia = static_cast<Index>(a);
    st.prior_var[post.idx[a]] = post.z[ia] * post.z[ia] + post.cov(ia, ia);
  }

  if (ss.n > 0.0) {
    double sse = residual_energy(ss, st.theta);
    if (!post.idx.empty()) {
      const VectorXd cross = ss.gamma_phi(post.idx, Eigen::all) * st.theta;
      sse += -2.0 * post.z.dot(ss.gamma_y(post.idx)) + 2.0 * post.z.dot(cross) + post.z.dot(post.gram * post.z) +
             post.cov.cwiseProduct(post.gram).sum();
    }
    const double floor = opts.sigma2_floor * std::max(ss.yy, std::numeric_limits<double>::min()) / ss.n;
    st.sigma2 = std::max(sse / ss.n, floor);
  }
}

// Leave-one-out ratio q_k^2 / s_k for each active component, computed from
// the posterior: s_k = 1/P_kk - 1/d_k and q_k = z_k / P_kk.
VectorXd loo_ratios(const ModelState& st, const Posterior& post) {
  const auto k = static_cast<Index>(post.idx.size());
  VectorXd ratio(k);
  const double s2 = st.sigma2;
  for (Index a = 0; a < k; ++a) {
    const double d = st.prior_var[post.idx[a]];
    const double pkk = post.cov(a, a);
    const double z = post.z[a];
    if (!(d > 0.0)) {
      ratio[a] = 0.0;
      continue;
    }
    double gap = d - pkk;
    if (gap <= 1e-8 * d) {
      // d S_k is tiny; evaluate S_k = g^T C^{-1} g directly.
      const double sps = post.gram.row(a).dot(post.cov * post.gram.col(a));
      const double sk = post.gram(a, a) / s2 - sps / (s2 * s2);
      gap = d * d * std::max(sk, 0.0);
    }
    if (gap <= 0.0 || pkk <= 0.0) {
      ratio[a] = 0.0;
      continue;
    }
    ratio[a] = z * z * d / (pkk * gap);
  }
  return ratio;
}

bool deactivate(ModelState& st, const std::vector<Index>& components) {
  for (Index c : components) {
    st.active[static_cast<std::size_t>(c)] = false;
    st.prior_var[c] = 0.0;
  }
  return !components.empty();
}

bool threshold_prune(ModelState& st, const EmOptions& opts) {
  double dmax = 0.0;
  for (Index k = 0; k < st.prior_var.size(); ++k) {
    if (st.active[static_cast<std::size_t>(k)]) dmax = std::max(dmax, st.prior_var[k]);
  }
  std::vector<Index> drop;
  for (Index k = 0; k < st.prior_var.size(); ++k) {
    if (st.active[static_cast<std::size_t>(k)] && !(st.prior_var[k] >= opts.prune_tol * dmax && dmax > 0.0)) {
      drop.push_back(k);
    }
  }
  return deactivate(st, drop);
}

// Removes components whose likelihood-maximising prior variance is zero.
// Each removal alone cannot lower the likelihood; a batch removal is kept
// only if the likelihood did not drop, otherwise the weakest one is removed.
bool exact_zero_prune(ModelState& st, Posterior& post) {
  const VectorXd ratio = loo_ratios(st, post);
  std::vector<Index> drop;
  Index weakest = -1;
  double weakest_ratio = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < ratio.size(); ++a) {
    if (ratio[a] <= 1.0) {
      drop.push_back(post.idx[static_cast<std::size_t>(a)]);
      if (ratio[a] < weakest_ratio) {
        weakest_ratio = ratio[a];
        weakest = post.idx[static_cast<std::size_t>(a)];
      }
    }
  }
  if (drop.empty()) return false;
  const double before = post.loglik;
  ModelState trial = st;
  deactivate(trial, drop);
  Posterior next = compute_posterior(trial);
  if (drop.size() > 1 && next.loglik < before - 1e-13 * std::abs(before)) {
    trial = st;
    deactivate(trial, {weakest});
    next = compute_posterior(trial);
  }
  st = std::move(trial);
  post = std::move(next);
  return true;
}

bool evidence_selection(ModelState& st, const Posterior& post) {
  const double penalty = 0.5 * std::log(std::max(st.stats.n, 1.0));
  const VectorXd ratio = loo_ratios(st, post);
  std::vector<Index> drop;
  for (Index a = 0; a < ratio.size(); ++a) {
    const double r = ratio[a];
    const double gain = r > 1.0 ? 0.5 * (r - 1.0 - std::log(r)) : 0.0;
    if (gain < penalty) drop.push_back(post.idx[static_cast<std::size_t>(a)]);
  }
  return deactivate(st, drop);
}

}  // namespace

SufficientStats SufficientStats::zeros(std::size_t nominal_dim, std::size_t latent_dim, double forgetting) {
  if (!(forgetting > 0.0 && forgetting <= 1.0)) throw ConfigError("forgetting factor must lie in (0, 1]");
  const auto p = static_cast<Index>(nominal_dim);
  const auto k = static_cast<Index>(latent_dim);
  SufficientStats s;
  s.forgetting = forgetting;
  s.phi_phi = MatrixXd::Zero(p, p);
  s.gamma_gamma = MatrixXd::Zero(k, k);
  s.gamma_phi = MatrixXd::Zero(k, p);
  s.phi_y = VectorXd::Zero(p);
  s.gamma_y = VectorXd::Zero(k);
  return s;
}

void SufficientStats::add(const VectorXd& phi, const VectorXd& gamma, double y) {
  if (phi.size() != phi_y.size() || gamma.size() != gamma_y.size()) {
    throw DataError("regressor dimensions (" + std::to_string(phi.size()) + ", " + std::to_string(gamma.size()) +
                    ") do not match statistics (" + std::to_string(phi_y.size()) + ", " +
                    std::to_string(gamma_y.size()) + ")");
  }
  if (forgetting != 1.0) {
    phi_phi *= forgetting;
    gamma_gamma *= forgetting;
    gamma_phi *= forgetting;
    phi_y *= forgetting;
    gamma_y *= forgetting;
    yy *= forgetting;
    y_sum *= forgetting;
    n *= forgetting;
  }
  phi_phi.noalias() += phi * phi.transpose();
  gamma_gamma.noalias() += gamma * gamma.transpose();
  gamma_phi.noalias() += gamma * phi.transpose();
  phi_y += y * phi;
  gamma_y += y * gamma;
  yy += y * y;
  y_sum += y;
  n += 1.0;
}

SufficientStats update_stats(SufficientStats stats, const VectorXd& phi, const VectorXd& gamma, double y) {
  stats.add(phi, gamma, y);
  return stats;
}

SufficientStats batch_stats(const MatrixXd& phi, const MatrixXd& gamma, const VectorXd& y) {
  if (phi.rows() != y.size() || gamma.rows() != y.size()) throw DataError("batch_stats: row count mismatch");
  SufficientStats s = SufficientStats::zeros(static_cast<std::size_t>(phi.cols()), static_cast<std::size_t>(gamma.cols()));
  s.phi_phi.noalias() = phi.transpose() * phi;
  s.gamma_gamma.noalias() = gamma.transpose() * gamma;
  s.gamma_phi.noalias() = gamma.transpose() * phi;
  s.phi_y.noalias() = phi.transpose() * y;
  s.gamma_y.noalias() = gamma.transpose() * y;
  s.yy = y.squaredNorm();
  s.y_sum = y.sum();
  s.n = static_cast<double>(y.size());
  return s;
}

void EmOptions::validate() const {
  if (max_iters < 1) throw ConfigError("estimator.max_iters must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("estimator.rel_tol must be positive");
  if (!(stall_tol >= rel_tol)) throw ConfigError("estimator.stall_tol must be >= rel_tol");
  if (!(prune_tol > 0.0 && prune_tol < 1.0)) throw ConfigError("estimator.prune_tol must lie in (0, 1)");
  if (iters_per_sample < 1) throw ConfigError("estimator.iters_per_sample must be positive");
  if (!(ridge_jitter > 0.0)) throw ConfigError("estimator.ridge_jitter must be positive");
  if (!(sigma2_floor > 0.0)) throw ConfigError("estimator.sigma2_floor must be positive");
  if (max_selection_rounds < 0) throw ConfigError("estimator.max_selection_rounds must be >= 0");
}

ModelState ModelState::initial(std::size_t nominal_dim, std::size_t latent_dim, double sigma2, double forgetting) {
  const auto p = static_cast<Index>(nominal_dim);
  const auto k = static_cast<Index>(latent_dim);
  ModelState st;
  st.theta = VectorXd::Zero(p);
  st.z_hat = VectorXd::Zero(k);
  st.posterior_cov = MatrixXd::Identity(k, k);
  st.prior_var = VectorXd::Ones(k);
  st.sigma2 = sigma2;
  st.active.assign(latent_dim, true);
  st.stats = SufficientStats::zeros(nominal_dim, latent_dim, forgetting);
  return st;
}

std::size_t ModelState::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

std::size_t ModelState::nonzero_count() const {
  return static_cast<std::size_t>((z_hat.array() != 0.0).count());
}

std::vector<Index> ModelState::active_indices() const {
  std::vector<Index> idx;
  idx.reserve(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (active[k]) idx.push_back(static_cast<Index>(k));
  }
  return idx;
}

EStepResult e_step(const ModelState& state) {
  ModelState tmp = state;
  scatter_posterior(tmp, compute_posterior(state));
  return {std::move(tmp.z_hat), std::move(tmp.posterior_cov)};
}

ModelState m_step(const ModelState& state, const EmOptions& opts) {
  Posterior post;
  post.idx = state.active_indices();
  post.gram = state.stats.gamma_gamma(post.idx, post.idx);
  post.z = state.z_hat(post.idx);
  post.cov = state.posterior_cov(post.idx, post.idx);
  ModelState out = state;
  m_step_inplace(out, post, opts);
  return out;
}

double marginal_log_likelihood(const SufficientStats& stats, const VectorXd& theta, const VectorXd& prior_var,
                               double sigma2) {
  ModelState st;
  st.theta = theta;
  st.prior_var = prior_var;
  st.sigma2 = sigma2;
  st.active.resize(static_cast<std::size_t>(prior_var.size()));
  for (Index k = 0; k < prior_var.size(); ++k) {
    if (prior_var[k] < 0.0) throw NumericError("prior variances must be non-negative");
    st.active[static_cast<std::size_t>(k)] = prior_var[k] > 0.0;
  }
  st.stats = stats;
  return compute_posterior(st).loglik;
}

double marginal_log_likelihood(const ModelState& state) {
  return compute_posterior(state).loglik;
}

ModelState initial_state(const SufficientStats& stats) {
  ModelState st = ModelState::initial(stats.nominal_dim(), stats.latent_dim(), 1.0, stats.forgetting);
  st.stats = stats;
  double var = 0.0;
  if (stats.n > 0.0) {
    const double mean = stats.y_sum / stats.n;
    var = stats.yy / stats.n - mean * mean;
  }
  const double floor = 1e-12 * (stats.n > 0.0 ? std::max(stats.yy / stats.n, 1e-300) : 1.0);
  st.sigma2 = std::max(var, floor);
  return st;
}

ModelState em_fit(const SufficientStats& stats, const EmOptions& opts, const ModelState* init, FitTrace* trace) {
  opts.validate();
  if (stats.n < 1.0) throw DataError("em_fit needs at least one sample");
  ModelState st;
  if (init != nullptr) {
    if (init->nominal_dim() != stats.nominal_dim() || init->latent_dim() != stats.latent_dim()) {
      throw DataError("initial state dimensions do not match the statistics");
    }
    st = *init;
    st.stats = stats;
  } else {
    st = initial_state(stats);
  }

  FitTrace local;
  FitTrace& tr = trace != nullptr ? *trace : local;
  tr = FitTrace{};

  Posterior post = compute_posterior(st);
  tr.loglik.push_back(post.loglik);
  double previous = post.loglik;
  int rounds = 0;

  for (int it = 0; it < opts.max_iters; ++it) {
    tr.iterations = it + 1;
    m_step_inplace(st, post, opts);
    bool pruned = threshold_prune(st, opts);
    post = compute_posterior(st);
    tr.loglik.push_back(post.loglik);

    const double current = post.loglik;
    const double change = std::abs(current - previous);
    const double scale = std::max(1.0, std::abs(current));
    previous = current;
    if (pruned) continue;
    // Components with a zero likelihood-maximising variance are removed once
    // EM has stalled, where the leave-one-out ratios are reliable.
    if (change <= opts.stall_tol * scale && exact_zero_prune(st, post)) {
      tr.loglik.push_back(post.loglik);
      previous = post.loglik;
      continue;
    }
    if (change > opts.rel_tol * scale) continue;

    if (opts.selection == SupportSelection::kEvidence && rounds < opts.max_selection_rounds &&
        evidence_selection(st, post)) {
      ++rounds;
      post = compute_posterior(st);
      tr.selection_points.push_back(tr.loglik.size());
      tr.loglik.push_back(post.loglik);
      previous = post.loglik;
      continue;
    }
    tr.converged = true;
    break;
  }

  scatter_posterior(st, post);
  return st;
}

void recursive_update_inplace(ModelState& state, const VectorXd& phi, const VectorXd& gamma, double y,
                              const EmOptions& opts) {
  state.stats.add(phi, gamma, y);
  for (int i = 0; i < opts.iters_per_sample; ++i) {
    const Posterior post = compute_posterior(state);
    m_step_inplace(state, post, opts);
    threshold_prune(state, opts);
  }
  scatter_posterior(state, compute_posterior(state));
}

ModelState recursive_update(ModelState state, const VectorXd& phi, const VectorXd& gamma, double y,
                            const EmOptions& opts) {
  recursive_update_inplace(state, phi, gamma, y, opts);
  return state;
}

VectorXd relevance_ratios(const ModelState& state) {
  const Posterior post = compute_posterior(state);
  return loo_ratios(state, post);
}

}  // namespace lava
