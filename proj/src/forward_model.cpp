#include "onebit/forward_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace onebit {

PilotMatrix generate_pilots(int users, int pilot_length, double power) {
  if (users < 1 || pilot_length < 1) throw std::invalid_argument("generate_pilots: dimensions must be >= 1");
  if (!(power > 0)) throw std::invalid_argument("generate_pilots: power must be > 0");
  const int n = std::max(users, pilot_length);
  const double amplitude = std::sqrt(power / pilot_length);
  PilotMatrix phi(users, pilot_length);
  for (int k = 0; k < users; ++k)
    for (int t = 0; t < pilot_length; ++t) {
      // reduce k*t mod n first so the phase argument stays small and exact
      const long long r = (static_cast<long long>(k) * t) % n;
      phi(k, t) = std::polar(amplitude, -2.0 * std::numbers::pi * static_cast<double>(r) / n);
    }
  return phi;
}

double noise_variance(const Eigen::MatrixXcd& x, double snr_db) {
  if (x.size() == 0) throw std::invalid_argument("noise_variance: empty matrix");
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return x.cwiseAbs2().mean() / std::pow(10.0, snr_db / 10.0);
}

Eigen::MatrixXcd add_awgn(const Eigen::MatrixXcd& x, double snr_db, Rng& rng) {
  if (x.size() == 0) throw std::invalid_argument("add_awgn: empty matrix");
  if (!x.allFinite()) throw std::invalid_argument("add_awgn: non-finite input");
  if (std::isinf(snr_db) && snr_db > 0) return x;
  const double sigma = std::sqrt(noise_variance(x, snr_db) / 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd out = x;
  // column-major traversal fixes the draw order
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      out(i, j) += std::complex<double>(sigma * re, sigma * im);
    }
  return out;
}

QuantizedObservation observe(const ChannelMatrix& h, const PilotMatrix& pilots, double snr_db, Rng& rng) {
  if (h.cols() != pilots.rows())
    throw std::invalid_argument("observe: channel has " + std::to_string(h.cols()) + " users but pilots have " +
                                std::to_string(pilots.rows()) + " rows");
  return one_bit_quantize(add_awgn(h * pilots, snr_db, rng));
}

QuantizedObservation observe_sample(const ChannelMatrix& h, const PilotMatrix& pilots, double snr_db,
                                    std::uint64_t noise_seed, std::uint64_t index) {
  Rng rng = make_rng(noise_seed, {stream::kNoise, index, snr_key(snr_db)});
  return observe(h, pilots, snr_db, rng);
}

bool is_quantized(const Eigen::MatrixXcd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto v = y.data()[i];
    if (std::abs(v.real()) != 1.0 || std::abs(v.imag()) != 1.0) return false;
  }
  return true;
}

}  // namespace onebit
