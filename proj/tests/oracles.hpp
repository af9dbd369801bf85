#pragma once
// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// E[x | sign(a_i . x) = y_i for all i] for x ~ N(0, sigma^2 I_d), by
/// numerical integration. x = rho u splits into E[rho] (chi distribution) and
/// the mean direction over the cone, integrated on a gnomonic chart of the
/// sphere centred at `inside` (any direction satisfying the constraints):
/// u = (c + B t) / |c + B t|, dOmega = dt / (1 + |t|^2)^(d/2).
inline Eigen::VectorXd cone_posterior_mean(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double sigma,
                                           const Eigen::VectorXd& inside, int grid = 96) {
  const Eigen::Index d = a.cols();
  const Eigen::VectorXd c = inside.normalized();
  // orthonormal basis of the tangent space at c
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(d, d);
  full.col(0) = c;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(full);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd basis = q.rightCols(d - 1);

  // constraint rows in chart coordinates: y_i a_i.(c + B t) >= 0  <=>  g_i . t + h_i >= 0
  const Eigen::MatrixXd ya = y.asDiagonal() * a;
  const Eigen::MatrixXd g = ya * basis;
  const Eigen::VectorXd h = ya * c;
  auto inside_chart = [&](const Eigen::VectorXd& t) { return ((g * t + h).array() >= 0).all(); };

  // grow a box until its outer shell holds no interior points
  if (d != 4) throw std::invalid_argument("cone_posterior_mean: implemented for d = 4");
  double w = 0.02;
  const int probe = 24;
  for (; w < 40; w *= 1.5) {
    bool touches = false;
    for (int i = 0; i < probe && !touches; ++i)
      for (int j = 0; j < probe && !touches; ++j)
        for (int k = 0; k < probe && !touches; ++k) {
          if (i != 0 && i != probe - 1 && j != 0 && j != probe - 1 && k != 0 && k != probe - 1) continue;
          Eigen::Vector3d t(-w + 2 * w * i / (probe - 1), -w + 2 * w * j / (probe - 1), -w + 2 * w * k / (probe - 1));
          touches = inside_chart(t);
        }
    if (!touches) break;
  }

  Eigen::VectorXd num = Eigen::VectorXd::Zero(d);
  double den = 0.0;
  const double step = 2 * w / grid;
  Eigen::Vector3d t;
  for (int i = 0; i < grid; ++i) {
    t(0) = -w + (i + 0.5) * step;
    for (int j = 0; j < grid; ++j) {
      t(1) = -w + (j + 0.5) * step;
      for (int k = 0; k < grid; ++k) {
        t(2) = -w + (k + 0.5) * step;
        if (!inside_chart(t)) continue;
        const double r2 = 1.0 + t.squaredNorm();
        const double jac = 1.0 / (r2 * r2);
        num += jac / std::sqrt(r2) * (c + basis * t);
        den += jac;
      }
    }
  }
  // E[chi_d] = sqrt(2) Gamma((d+1)/2) / Gamma(d/2)
  const double chi_mean = std::sqrt(2.0) * std::tgamma((d + 1) / 2.0) / std::tgamma(d / 2.0);
  return sigma * chi_mean * num / den;
}

/// 10 log10 of the mean normalized error, computed with plain loops.
inline double nmse_db_loop(const std::vector<Eigen::MatrixXcd>& truth, const std::vector<Eigen::MatrixXcd>& est) {
  double acc = 0.0;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    double err = 0.0, ref = 0.0;
    for (Eigen::Index i = 0; i < truth[n].rows(); ++i)
      for (Eigen::Index j = 0; j < truth[n].cols(); ++j) {
        err += std::norm(truth[n](i, j) - est[n](i, j));
        ref += std::norm(truth[n](i, j));
      }
    acc += err / ref;
  }
  return 10.0 * std::log10(std::max(acc / static_cast<double>(truth.size()), 1e-12));
}

}  // namespace oracle
