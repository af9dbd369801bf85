#include "onebit/gamp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace onebit {

void GampConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("GampConfig: max_iterations must be >= 1");
  if (!(damping > 0 && damping <= 1)) throw std::invalid_argument("GampConfig: damping must be in (0, 1]");
  if (mixture_components < 1) throw std::invalid_argument("GampConfig: mixture_components must be >= 1");
  if (em_iterations < 0) throw std::invalid_argument("GampConfig: em_iterations must be >= 0");
  if (!(tolerance > 0)) throw std::invalid_argument("GampConfig: tolerance must be > 0");
  if (prior_variance < 0) throw std::invalid_argument("GampConfig: prior_variance must be >= 0");
}

GaussianMixture GaussianMixture::initial(int components, double total_variance) {
  GaussianMixture g;
  g.weights = Eigen::VectorXd::Constant(components, 1.0 / components);
  g.variances.resize(components);
  for (int c = 0; c < components; ++c) g.variances(c) = std::pow(4.0, c - (components - 1) / 2.0);
  g.variances *= total_variance / g.weights.dot(g.variances);
  return g;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

double log_normal0(double x, double var) { return -0.5 * (kLog2Pi + std::log(var) + x * x / var); }

/// Log-domain responsibilities of each component for one pseudo-observation.
Eigen::VectorXd responsibilities(const GaussianMixture& g, double r, double tau_r, double* log_evidence = nullptr) {
  const Eigen::Index C = g.weights.size();
  Eigen::VectorXd lw(C);
  for (Eigen::Index c = 0; c < C; ++c)
    lw(c) = std::log(std::max(g.weights(c), 1e-300)) + log_normal0(r, g.variances(c) + tau_r);
  const double mx = lw.maxCoeff();
  Eigen::VectorXd b = (lw.array() - mx).exp().matrix();
  const double s = b.sum();
  if (log_evidence) *log_evidence = mx + std::log(s);
  return b / s;
}

}  // namespace

ScalarPosterior gm_posterior(const GaussianMixture& prior, double r, double tau_r) {
  const Eigen::VectorXd beta = responsibilities(prior, r, tau_r);
  double m1 = 0.0, m2 = 0.0;
  for (Eigen::Index c = 0; c < beta.size(); ++c) {
    const double v = prior.variances(c);
    const double gamma = r * v / (v + tau_r);
    const double nu = v * tau_r / (v + tau_r);
    m1 += beta(c) * gamma;
    m2 += beta(c) * (gamma * gamma + nu);
  }
  return {m1, std::max(m2 - m1 * m1, 0.0)};
}

double gm_log_likelihood(const GaussianMixture& prior, const Eigen::VectorXd& r, const Eigen::VectorXd& tau_r) {
  double ll = 0.0;
  for (Eigen::Index n = 0; n < r.size(); ++n) {
    double e = 0.0;
    responsibilities(prior, r(n), tau_r(n), &e);
    ll += e;
  }
  return ll;
}

GaussianMixture gm_em_step(const GaussianMixture& prior, const Eigen::VectorXd& r, const Eigen::VectorXd& tau_r) {
  const Eigen::Index C = prior.weights.size();
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(C), second = Eigen::VectorXd::Zero(C);
  for (Eigen::Index n = 0; n < r.size(); ++n) {
    const Eigen::VectorXd beta = responsibilities(prior, r(n), tau_r(n));
    for (Eigen::Index c = 0; c < C; ++c) {
      const double v = prior.variances(c);
      const double gamma = r(n) * v / (v + tau_r(n));
      const double nu = v * tau_r(n) / (v + tau_r(n));
      mass(c) += beta(c);
      second(c) += beta(c) * (gamma * gamma + nu);
    }
  }
  GaussianMixture next = prior;
  const double total = mass.sum();
  for (Eigen::Index c = 0; c < C; ++c) {
    if (mass(c) <= 1e-300) continue;
    next.weights(c) = mass(c) / total;
    next.variances(c) = std::max(second(c) / mass(c), 1e-12);
  }
  return next;
}

double inverse_mills(double c) {
  if (c > -30.0) {
    const double pdf = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
    const double cdf = 0.5 * std::erfc(-c / std::numbers::sqrt2);
    return pdf / cdf;
  }
  // Phi(c)/phi(c) ~ (1/|c|)(1 - 1/c^2 + 3/c^4 - 15/c^6)
  const double c2 = c * c;
  return -c / (1.0 - 1.0 / c2 + 3.0 / (c2 * c2) - 15.0 / (c2 * c2 * c2));
}

OutputPosterior sign_output_posterior(double y, double p, double tau_p, double noise_var) {
  const double total = tau_p + noise_var;
  const double denom = std::sqrt(total);
  const double c = y * p / denom;
  const double ratio = inverse_mills(c);
  OutputPosterior out;
  out.mean = p + y * tau_p * ratio / denom;
  out.variance = tau_p - tau_p * tau_p * ratio * (c + ratio) / total;
  out.variance = std::clamp(out.variance, tau_p * 1e-12, tau_p);
  return out;
}

Eigen::MatrixXd real_measurement_matrix(const PilotMatrix& pilots) {
  const Eigen::Index K = pilots.rows(), T = pilots.cols();
  const Eigen::MatrixXd re = pilots.real().transpose();
  const Eigen::MatrixXd im = pilots.imag().transpose();
  Eigen::MatrixXd a(2 * T, 2 * K);
  a << re, -im, im, re;
  return a;
}

GampResult gamp_estimate(const QuantizedObservation& y, const PilotMatrix& pilots, double snr_db,
                         const GampConfig& config) {
  config.validate();
  const Eigen::Index M = y.rows(), K = pilots.rows(), T = pilots.cols();
  if (y.cols() != T) throw std::invalid_argument("gamp_estimate: Y and pilots disagree on the pilot length");
  for (Eigen::Index t = 0; t < T; ++t)
    if (pilots.col(t).cwiseAbs().maxCoeff() == 0.0)
      throw std::invalid_argument("gamp_estimate: degenerate pilots (zero column " + std::to_string(t) + ")");
  for (Eigen::Index k = 0; k < K; ++k)
    if (pilots.row(k).cwiseAbs().maxCoeff() == 0.0)
      throw std::invalid_argument("gamp_estimate: degenerate pilots (user " + std::to_string(k) + " has none)");
  if (!is_quantized(y)) throw std::invalid_argument("gamp_estimate: Y is not a one-bit observation");

  const Eigen::MatrixXd A = real_measurement_matrix(pilots);
  const Eigen::MatrixXd A2 = A.cwiseAbs2();
  const double complex_var = config.prior_variance > 0 ? config.prior_variance : 1.0 / static_cast<double>(K);
  const double real_var = complex_var / 2.0;
  double noise_var = 0.0;
  if (!(std::isinf(snr_db) && snr_db > 0)) {
    const double signal = complex_var * pilots.squaredNorm() / static_cast<double>(T);
    noise_var = signal / std::pow(10.0, snr_db / 10.0) / 2.0;
  }

  // one column per antenna row
  Eigen::MatrixXd Y(2 * T, M);
  Y.topRows(T) = y.real().transpose();
  Y.bottomRows(T) = y.imag().transpose();

  GaussianMixture prior = GaussianMixture::initial(config.mixture_components, real_var);
  const Eigen::Index N = 2 * K;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, M);
  Eigen::MatrixXd TX = Eigen::MatrixXd::Constant(N, M, prior.weights.dot(prior.variances));
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * T, M), TS = Eigen::MatrixXd::Zero(2 * T, M);
  Eigen::MatrixXd R(N, M), TR(N, M);

  GampResult result;
  const double beta = config.damping;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const Eigen::MatrixXd TP = A2 * TX;
    const Eigen::MatrixXd P = A * X - TP.cwiseProduct(S);
    Eigen::MatrixXd S_new(2 * T, M), TS_new(2 * T, M);
    for (Eigen::Index m = 0; m < M; ++m)
      for (Eigen::Index i = 0; i < 2 * T; ++i) {
        const double tp = TP(i, m);
        const auto o = sign_output_posterior(Y(i, m), P(i, m), tp, noise_var);
        S_new(i, m) = (o.mean - P(i, m)) / tp;
        TS_new(i, m) = std::max((1.0 - o.variance / tp) / tp, 1e-300);
      }
    if (it == 1) {
      S = S_new;
      TS = TS_new;
    } else {
      S = beta * S_new + (1.0 - beta) * S;
      TS = beta * TS_new + (1.0 - beta) * TS;
    }
    TR = (A2.transpose() * TS).cwiseInverse();
    R = X + TR.cwiseProduct(A.transpose() * S);

    Eigen::MatrixXd X_new(N, M), TX_new(N, M);
    for (Eigen::Index m = 0; m < M; ++m)
      for (Eigen::Index n = 0; n < N; ++n) {
        const auto post = gm_posterior(prior, R(n, m), TR(n, m));
        X_new(n, m) = post.mean;
        TX_new(n, m) = std::max(post.variance, 1e-300);
      }
    const Eigen::MatrixXd X_old = X;
    X = beta * X_new + (1.0 - beta) * X;
    TX = beta * TX_new + (1.0 - beta) * TX;

    result.trace.max_abs_state.push_back(std::max({X.cwiseAbs().maxCoeff(), TX.maxCoeff(), S.cwiseAbs().maxCoeff(),
                                                   TS.maxCoeff()}));
    result.iterations = it;

    if (config.em_iterations > 0 && it % config.em_iterations == 0) {
      const Eigen::VectorXd r = R.reshaped();
      const Eigen::VectorXd tr = TR.reshaped();
      result.trace.em_log_likelihood_before.push_back(gm_log_likelihood(prior, r, tr));
      prior = gm_em_step(prior, r, tr);
      result.trace.em_log_likelihood_after.push_back(gm_log_likelihood(prior, r, tr));
    }

    const double change = (X - X_old).squaredNorm() / std::max(X.squaredNorm(), 1e-300);
    if (!X.allFinite()) break;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.estimate.resize(M, K);
  for (Eigen::Index m = 0; m < M; ++m)
    for (Eigen::Index k = 0; k < K; ++k) result.estimate(m, k) = {X(k, m), X(K + k, m)};
  return result;
}

}  // namespace onebit
