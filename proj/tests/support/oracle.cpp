#include "support/oracle.hpp"

#include <cmath>
#include <numbers>

namespace lava::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd random_vector(int n, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> nd(0.0, sd);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

Problem random_problem(int n, int p, int k, std::uint64_t seed, double noise_sd, double latent_sd) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Problem pr;
  pr.phi.resize(n, p);
  pr.gamma.resize(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) pr.phi(i, j) = j == 0 ? 1.0 : nd(rng);
    for (int j = 0; j < k; ++j) pr.gamma(i, j) = nd(rng);
  }
  const VectorXd theta = random_vector(p, rng);
  const VectorXd z = random_vector(k, rng, latent_sd);
  pr.y = pr.phi * theta + pr.gamma * z + random_vector(n, rng, noise_sd);
  return pr;
}

SufficientStats loop_stats(const Problem& pr) {
  const auto n = pr.y.size();
  const auto p = pr.phi.cols();
  const auto k = pr.gamma.cols();
  SufficientStats s;
  s.forgetting = 1.0;
  s.phi_phi = MatrixXd::Zero(p, p);
  s.gamma_gamma = MatrixXd::Zero(k, k);
  s.gamma_phi = MatrixXd::Zero(k, p);
  s.phi_y = VectorXd::Zero(p);
  s.gamma_y = VectorXd::Zero(k);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index a = 0; a < p; ++a) {
      for (Eigen::Index b = 0; b < p; ++b) s.phi_phi(a, b) += pr.phi(t, a) * pr.phi(t, b);
      s.phi_y[a] += pr.phi(t, a) * pr.y[t];
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) s.gamma_gamma(a, b) += pr.gamma(t, a) * pr.gamma(t, b);
      for (Eigen::Index b = 0; b < p; ++b) s.gamma_phi(a, b) += pr.gamma(t, a) * pr.phi(t, b);
      s.gamma_y[a] += pr.gamma(t, a) * pr.y[t];
    }
    s.yy += pr.y[t] * pr.y[t];
    s.y_sum += pr.y[t];
    s.n += 1.0;
  }
  return s;
}

namespace {

MatrixXd marginal_cov(const Problem& pr, const VectorXd& d, double sigma2) {
  MatrixXd c = pr.gamma * d.asDiagonal() * pr.gamma.transpose();
  c.diagonal().array() += sigma2;
  return c;
}

}  // namespace

double dense_loglik(const Problem& pr, const VectorXd& theta, const VectorXd& d, double sigma2) {
  const MatrixXd c = marginal_cov(pr, d, sigma2);
  const Eigen::LLT<MatrixXd> llt(c);
  const VectorXd r = pr.y - pr.phi * theta;
  const VectorXd w = llt.matrixL().solve(r);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double n = static_cast<double>(pr.y.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet + w.squaredNorm());
}

DensePosterior dense_posterior(const Problem& pr, const VectorXd& theta, const VectorXd& d, double sigma2) {
  const MatrixXd c = marginal_cov(pr, d, sigma2);
  const Eigen::LLT<MatrixXd> llt(c);
  const MatrixXd cross = d.asDiagonal() * pr.gamma.transpose();  // Cov(z, y), K x n
  const VectorXd r = pr.y - pr.phi * theta;
  DensePosterior out;
  out.mean = cross * llt.solve(r);
  out.cov = MatrixXd(d.asDiagonal()) - cross * llt.solve(cross.transpose());
  return out;
}

}  // namespace lava::oracle
