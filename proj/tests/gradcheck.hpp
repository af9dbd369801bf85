#pragma once
// Central-difference gradient checking shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "onebit/nn/layers.hpp"

namespace gradcheck {

namespace nn = onebit::nn;
using nn::Index;
using T = nn::Tensor<double>;

template <typename Net>
double l2_of(const Net& net, const T& x, const T& target) {
  return (net.apply(x).data - target.data).squaredNorm();
}

/// Compares analytic gradients of sum (f(x) - target)^2 with central differences
/// at `probes` randomly chosen parameter entries. Returns the worst relative error.
template <typename Net>
double gradient_check(Net& net, const T& x, const T& target, int probes, std::mt19937_64& rng) {
  auto params = net.parameters();
  nn::zero_grad(params);
  T out = net.forward(x);
  T g = out;
  g.data = 2.0 * (out.data - target.data);
  net.backward(g);

  std::vector<std::pair<nn::Parameter<double>*, Index>> entries;
  for (auto* p : params)
    for (Index i = 0; i < p->value.size(); ++i) entries.emplace_back(p, i);
  std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
  const double h = 1e-4;
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    auto [p, i] = entries[pick(rng)];
    double& w = p->value.data()[i];
    const double saved = w;
    w = saved + h;
    const double up = l2_of(net, x, target);
    w = saved - h;
    const double down = l2_of(net, x, target);
    w = saved;
    const double numeric = (up - down) / (2 * h);
    const double analytic = p->grad.data()[i];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

/// Two convolutions on a 4x4 input, wrapped as a network for the gradient checker.
struct TinyNet {
  nn::Sequential<double> body;
  TinyNet() {
    body.add<nn::Conv2d<double>>("c1", 2, 3, 3, 3, 1, 1);
    body.add<nn::InstanceNorm<double>>("n1", 3);
    body.add<nn::LeakyRelu<double>>(0.2);
    body.add<nn::Conv2d<double>>("c2", 3, 2, 2, 2, 2, 2);
    body.add<nn::Tanh<double>>();
  }
  T apply(const T& x) const { return body.apply(x); }
  T forward(const T& x) { return body.forward(x); }
  T backward(const T& g) { return body.backward(g); }
  nn::ParameterList<double> parameters() {
    nn::ParameterList<double> p;
    body.collect(p);
    return p;
  }
};

}  // namespace gradcheck
