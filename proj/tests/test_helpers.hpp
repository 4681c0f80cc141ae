#pragma once

#include <random>

#include "pcf/autodiff.hpp"
#include "pcf/model.hpp"

namespace pcf::testing {

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

/// Random-weight model: glorot init plus a small perturbation so heads are
/// not exactly at their initialization.
inline PcfModel random_model(const PcfArchitecture& arch_in, std::uint64_t seed) {
  const PcfArchitecture arch = arch_in.finalized();
  std::mt19937_64 rng(seed ^ 0xabcdef12u);
  Vector w = init_weights(arch, seed);
  w += 0.05 * random_vector(rng, w.size());
  return {arch, std::move(w), std::nullopt};
}

/// Dataset whose targets come from a reference model (in-architecture data).
inline Dataset dataset_from_model(const PcfModel& model, Eigen::Index N, std::uint64_t seed,
                                  double x_range = 1.0, double th_range = 1.0) {
  std::mt19937_64 rng(seed);
  Dataset data;
  data.X = random_matrix(rng, N, model.arch.n, -x_range, x_range);
  data.Theta = random_matrix(rng, N, model.arch.p, -th_range, th_range);
  data.Y = predict_core(model.arch, model.weights, data.X, data.Theta);
  return data;
}

/// Central finite difference of a scalar function along coordinate i.
template <typename F>
double fd_coord(const F& f, Vector w, Eigen::Index i, double h) {
  w[i] += h;
  const double up = f(w);
  w[i] -= 2.0 * h;
  const double dn = f(w);
  return (up - dn) / (2.0 * h);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace pcf::testing
