#include "pcf/experiments/generators.hpp"

#include <cmath>
#include <random>

namespace pcf::experiments {

double pwa_true(double x, const Vector& theta) {
  if (theta.size() != 4) throw InvalidInput("pwa theta must be (s+, s-, m, v)");
  const double sp = theta[0], sm = theta[1], m = theta[2], v = theta[3];
  return sp * std::max(0.0, x - m) + sm * std::max(0.0, m - x) + v;
}

PwaData gen_pwa(int n_theta, int n_x, std::uint64_t seed) {
  if (n_theta < 1 || n_x < 1) throw InvalidInput("gen_pwa: counts must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  PwaData out;
  out.thetas.resize(n_theta, 4);
  out.convex.resize(static_cast<size_t>(n_theta));
  out.affine_coef.resize(n_theta, 2);

  Vector grid(n_x);
  for (int i = 0; i < n_x; ++i)
    grid[i] = n_x == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / (n_x - 1);

  const Eigen::Index N = static_cast<Eigen::Index>(n_theta) * n_x;
  out.data.X.resize(N, 1);
  out.data.Theta.resize(N, 4);
  out.data.Y.resize(N, 1);

  for (int t = 0; t < n_theta; ++t) {
    Vector theta(4);
    for (int c = 0; c < 4; ++c) theta[c] = unit(rng);
    out.thetas.row(t) = theta.transpose();
    out.convex[static_cast<size_t>(t)] = theta[0] >= -theta[1];

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n_x; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(t) * n_x + i;
      const double y = pwa_true(grid[i], theta);
      out.data.X(k, 0) = grid[i];
      out.data.Theta.row(k) = theta.transpose();
      out.data.Y(k, 0) = y;
      sx += grid[i];
      sy += y;
      sxx += grid[i] * grid[i];
      sxy += grid[i] * y;
    }
    // least-squares affine fit a + b x on this slice
    const double denom = n_x * sxx - sx * sx;
    const double b = denom != 0.0 ? (n_x * sxy - sx * sy) / denom : 0.0;
    const double a = (sy - b * sx) / n_x;
    out.affine_coef(t, 0) = a;
    out.affine_coef(t, 1) = b;
  }
  return out;
}

Dataset gen_quadratic(int n_theta, int n_x, int n_dim, std::uint64_t seed) {
  if (n_theta < 1 || n_x < 1 || n_dim < 1) throw InvalidInput("gen_quadratic: counts must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);

  Dataset data;
  const Eigen::Index N = static_cast<Eigen::Index>(n_theta) * n_x;
  data.X.resize(N, n_dim);
  data.Theta.resize(N, n_dim * n_dim);
  data.Y.resize(N, 1);

  for (int t = 0; t < n_theta; ++t) {
    Matrix S(n_dim, n_dim);
    for (int r = 0; r < n_dim; ++r)
      for (int c = 0; c < n_dim; ++c) S(r, c) = unit(rng);
    Matrix Th = S.transpose() * S / std::sqrt(static_cast<double>(n_dim));
    Eigen::Map<Vector> flat(Th.data(), Th.size());  // symmetric, so storage order is moot
    for (int i = 0; i < n_x; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(t) * n_x + i;
      // uniform on the unit ball: gaussian direction, radius u^(1/n)
      Vector x(n_dim);
      for (int c = 0; c < n_dim; ++c) x[c] = gauss(rng);
      const double nrm = x.norm();
      if (nrm > 0)
        x *= std::pow(unif01(rng), 1.0 / n_dim) / nrm;
      data.X.row(k) = x.transpose();
      data.Theta.row(k) = flat.transpose();
      data.Y(k, 0) = x.dot(Th * x);
    }
  }
  return data;
}

double battery_true(const Vector& x, const Vector& theta, const BatteryConstants& c) {
  if (x.size() != 2) throw InvalidInput("battery x must be (q, b)");
  if (theta.size() != 3) throw InvalidInput("battery theta must be (A, Q, T)");
  const double q = x[0], b = x[1];
  const double A = theta[0], Q = theta[1], T = theta[2];
  if (!(A > 0.0) || !(Q > 0.0)) throw InvalidInput("battery: A and Q must be > 0");
  if (b < 0.0) throw InvalidInput("battery: charge rate b must be >= 0");
  return c.z * std::pow(A, c.z - 1.0) * b * (c.alpha * q / Q + c.beta) *
         std::exp((-c.E_a + c.eta * b / Q) / (c.R_g * (c.T0 + T)));
}

double battery_short(const Vector& x, const Vector& theta, const BatteryConstants& c) {
  if (x.size() != 2) throw InvalidInput("battery x must be (q, b)");
  if (theta.size() != 3) throw InvalidInput("battery theta must be (A, Q, T)");
  const double b = x[1];
  const double A = theta[0], Q = theta[1], T = theta[2];
  if (!(A > 0.0) || !(Q > 0.0)) throw InvalidInput("battery: A and Q must be > 0");
  const double mu = c.beta * std::exp(-c.E_a / (c.R_g * (c.T0 + T))) * c.z * std::pow(A, c.z - 1.0);
  const double nu = c.alpha / (c.beta * Q);
  return mu * (1.0 + nu * Q / 2.0) * b;
}

Dataset gen_battery(int n_theta, int n_x, std::uint64_t seed, const BatteryConstants& c) {
  if (n_theta < 1 || n_x < 1) throw InvalidInput("gen_battery: counts must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a_dist(0.0, 50.0);
  std::uniform_real_distribution<double> t_dist(10.0, 50.0);
  std::uniform_real_distribution<double> q_dist(0.2, 0.8);
  std::uniform_real_distribution<double> b_dist(0.0, 30.0);

  Dataset data;
  const Eigen::Index N = static_cast<Eigen::Index>(n_theta) * n_x;
  data.X.resize(N, 2);
  data.Theta.resize(N, 3);
  data.Y.resize(N, 1);
  for (int t = 0; t < n_theta; ++t) {
    Vector theta(3);
    theta[0] = std::max(a_dist(rng), 1e-6);  // A^(z-1) blows up at A = 0
    theta[1] = c.Q;
    theta[2] = t_dist(rng);
    for (int i = 0; i < n_x; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(t) * n_x + i;
      Vector x(2);
      x[0] = q_dist(rng);
      x[1] = b_dist(rng);
      data.X.row(k) = x.transpose();
      data.Theta.row(k) = theta.transpose();
      data.Y(k, 0) = battery_true(x, theta, c);
    }
  }
  return data;
}

Dataset gen_ellipse_classification(int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InvalidInput("gen_ellipse_classification: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> r_dist(0.5, 1.5);
  std::uniform_real_distribution<double> x_dist(-2.0, 2.0);
  Dataset data;
  data.X.resize(n_samples, 2);
  data.Theta.resize(n_samples, 2);
  data.Y.resize(n_samples, 1);
  for (int k = 0; k < n_samples; ++k) {
    const double r1 = r_dist(rng), r2 = r_dist(rng);
    const double x1 = x_dist(rng), x2 = x_dist(rng);
    const double lvl = (x1 / r1) * (x1 / r1) + (x2 / r2) * (x2 / r2);
    data.X(k, 0) = x1;
    data.X(k, 1) = x2;
    data.Theta(k, 0) = r1;
    data.Theta(k, 1) = r2;
    data.Y(k, 0) = lvl <= 1.0 ? 1.0 : -1.0;
  }
  return data;
}

}  // namespace pcf::experiments
