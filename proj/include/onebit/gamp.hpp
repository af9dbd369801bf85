#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "onebit/channel_model.hpp"
#include "onebit/estimator.hpp"
#include "onebit/forward_model.hpp"

namespace onebit {

struct GampConfig {
  int max_iterations = 50;
  double damping = 0.7;        // weight of the new iterate
  int mixture_components = 3;
  int em_iterations = 10;      // GAMP iterations between EM refits; 0 disables EM
  double tolerance = 1e-6;
  double prior_variance = 0.0; // per complex entry; 0 means 1/K (unit per-user path power)

  void validate() const;
};

/// Zero-mean Gaussian mixture over one real coordinate.
struct GaussianMixture {
  Eigen::VectorXd weights;
  Eigen::VectorXd variances;

  static GaussianMixture initial(int components, double total_variance);
};

/// Posterior moments of x under `prior` given r = x + N(0, tau_r).
struct ScalarPosterior {
  double mean = 0.0;
  double variance = 0.0;
};
ScalarPosterior gm_posterior(const GaussianMixture& prior, double r, double tau_r);

/// sum_n log sum_c w_c N(r_n; 0, v_c + tau_r_n): the likelihood EM climbs.
double gm_log_likelihood(const GaussianMixture& prior, const Eigen::VectorXd& r, const Eigen::VectorXd& tau_r);

/// One EM refit of mixture weights and variances from pseudo-observations.
GaussianMixture gm_em_step(const GaussianMixture& prior, const Eigen::VectorXd& r, const Eigen::VectorXd& tau_r);

/// Output-channel moments for y = sgn(z + w), z ~ N(p, tau_p), w ~ N(0, noise_var).
struct OutputPosterior {
  double mean = 0.0;
  double variance = 0.0;
};
OutputPosterior sign_output_posterior(double y, double p, double tau_p, double noise_var);

/// phi(c) / Phi(c), stable for very negative c.
double inverse_mills(double c);

struct GampTrace {
  std::vector<double> em_log_likelihood_before;
  std::vector<double> em_log_likelihood_after;
  std::vector<double> max_abs_state;  // per iteration, over means and variances
};

struct GampResult {
  ChannelMatrix estimate;
  bool converged = false;
  int iterations = 0;
  GampTrace trace;
};

/// Row-wise one-bit GAMP with a Gaussian-mixture prior refitted by EM.
GampResult gamp_estimate(const QuantizedObservation& y, const PilotMatrix& pilots, double snr_db,
                         const GampConfig& config);

/// Real-valued measurement matrix of z = Phi^T h for h = [Re h; Im h].
Eigen::MatrixXd real_measurement_matrix(const PilotMatrix& pilots);

class GampEstimator final : public ChannelEstimator {
 public:
  explicit GampEstimator(GampConfig config = {}) : config_(config) { config_.validate(); }
  std::string name() const override { return "gamp"; }
  ChannelMatrix estimate(const QuantizedObservation& y, const PilotMatrix& pilots, double snr_db) const override {
    return gamp_estimate(y, pilots, snr_db, config_).estimate;
  }
  const GampConfig& config() const { return config_; }

 private:
  GampConfig config_;
};

}  // namespace onebit
