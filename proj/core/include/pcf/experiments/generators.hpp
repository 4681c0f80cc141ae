#pragma once

#include <cstdint>
#include <vector>

#include "pcf/dataset.hpp"

namespace pcf::experiments {

/// Piecewise-affine ground truth y = s+ max(0, x - m) + s- max(0, m - x) + v
/// with theta = (s+, s-, m, v). Convex exactly when s+ >= -s-.
double pwa_true(double x, const Vector& theta);

struct PwaData {
  Dataset data;               // n_theta * n_x samples; x equispaced on [-1, 1]
  Matrix thetas;              // n_theta x 4, sampled uniform on [-1, 1]^4
  std::vector<bool> convex;   // per theta: s+ >= -s-
  Matrix affine_coef;         // n_theta x 2 (intercept, slope): least-squares
                              // affine fit of each theta's slice
};

PwaData gen_pwa(int n_theta, int n_x, std::uint64_t seed);

/// Parametrized quadratic y = x' Th x with Th symmetric PSD, built as
/// Th = S'S / sqrt(n) with S entries uniform on [-1, 1]. The dataset's theta
/// vector is the row-major flattening of Th (p = n^2); x is uniform on the
/// unit ball.
Dataset gen_quadratic(int n_theta, int n_x, int n_dim, std::uint64_t seed);

struct BatteryConstants {
  double E_a = 31500.0;
  double R_g = 8.3145;
  double T0 = 273.15;
  double alpha = 28.966;
  double beta = 74.112;
  double z = 0.6;
  double eta = 152.5;
  double Q = 1.0;  // capacity used by the generator
};

/// Aging rate for x = (q, b) and theta = (A, Q, T):
///   z A^(z-1) b (alpha q / Q + beta) exp((-E_a + eta b / Q) / (R_g (T0 + T)))
double battery_true(const Vector& x, const Vector& theta, const BatteryConstants& c = {});

/// Short-term approximation mu (1 + nu Q / 2) b with
/// mu = beta exp(-E_a / (R_g (T0 + T))) z A^(z-1) and nu = alpha / (beta Q);
/// the first-order Taylor expansion of battery_true at (q, b) = (Q/2, 0).
double battery_short(const Vector& x, const Vector& theta, const BatteryConstants& c = {});

/// theta: A uniform on [0, 50] (clamped away from the A = 0 singularity),
/// T uniform on [10, 50], Q fixed; x: q uniform on [0.2, 0.8], b on [0, 30].
Dataset gen_battery(int n_theta, int n_x, std::uint64_t seed, const BatteryConstants& c = {});

/// Labeled points for a parametrized ellipse C(theta) = {x : (x1/r1)^2 +
/// (x2/r2)^2 <= 1}, theta = (r1, r2) uniform on [0.5, 1.5]^2, x uniform on
/// [-2, 2]^2, label +1 inside and -1 outside.
Dataset gen_ellipse_classification(int n_samples, std::uint64_t seed);

}  // namespace pcf::experiments
