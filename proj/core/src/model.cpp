#include "pcf/model.hpp"

#include <cmath>
#include <sstream>

#include "pcf/activation.hpp"

namespace pcf {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteError(std::string("non-finite value in ") + what);
}

void require_dim(const Vector& v, int want, const char* what) {
  if (v.size() != want) {
    std::ostringstream msg;
    msg << what << " has length " << v.size() << ", expected " << want;
    throw InvalidInput(msg.str());
  }
}

Vector standardize(const Vector& v, const Vector& shift, const Vector& scale) {
  return (v - shift).cwiseQuotient(scale);
}

}  // namespace

Vector emitted_raw(const PcfArchitecture& arch, const Vector& w, const Vector& theta) {
  require_dim(theta, arch.p, "theta");
  require_dim(w, weight_count(arch), "weight vector");
  require_finite(theta, "theta");
  const PsiLayout psi = psi_layout(arch);
  const int M = psi.depth();
  auto a_blk = [&](int j) {  // A^j, j >= 2
    const BlockInfo& b = psi.A[static_cast<size_t>(j - 2)];
    return Eigen::Map<const RowMajorMatrix>(w.data() + b.offset, b.rows, b.cols);
  };
  auto c_blk = [&](int j) {  // C^j, j >= 1
    const BlockInfo& b = psi.C[static_cast<size_t>(j - 1)];
    return Eigen::Map<const RowMajorMatrix>(w.data() + b.offset, b.rows, b.cols);
  };
  auto b_blk = [&](int j) {
    const BlockInfo& b = psi.b[static_cast<size_t>(j - 1)];
    return Eigen::Map<const Vector>(w.data() + b.offset, b.rows);
  };
  Vector u;
  for (int j = 1; j < M; ++j) {
    Vector s = c_blk(j) * theta + b_blk(j);
    if (j >= 2) s.noalias() += a_blk(j) * u;
    u = s.unaryExpr([&](double a) { return activate(arch.activation, a); });
  }
  Vector raw = c_blk(M) * theta + b_blk(M);
  if (M >= 2) raw.noalias() += a_blk(M) * u;
  return raw;
}

MaterializedLayers blocks_from_emitted(const PcfArchitecture& arch, const Vector& emitted) {
  const EmittedLayout lay = emitted_layout(arch);
  require_dim(emitted, lay.total, "emitted vector");
  MaterializedLayers out;
  auto mat = [&emitted](const BlockInfo& b) {
    return Matrix(Eigen::Map<const RowMajorMatrix>(emitted.data() + b.offset, b.rows, b.cols));
  };
  for (const BlockInfo& b : lay.W) out.W.push_back(mat(b).cwiseMax(0.0));
  for (const BlockInfo& b : lay.V) {
    Matrix v = mat(b);
    for (int c = 0; c < v.cols(); ++c) {
      switch (arch.coord_mode(c)) {
        case Monotonicity::None:
          break;
        case Monotonicity::Increasing:
          v.col(c) = v.col(c).cwiseMax(0.0);
          break;
        case Monotonicity::Decreasing:
          v.col(c) = -v.col(c).cwiseMax(0.0);
          break;
      }
    }
    out.V.push_back(std::move(v));
  }
  for (const BlockInfo& b : lay.omega)
    out.omega.emplace_back(Eigen::Map<const Vector>(emitted.data() + b.offset, b.rows));
  if (arch.quadratic.kind == QuadraticSpec::Kind::Full) {
    Matrix U = Matrix::Zero(arch.n, arch.n);
    int k = lay.U.offset;
    for (int i = 0; i < arch.n; ++i)
      for (int j = i; j < arch.n; ++j) U(i, j) = emitted[k++];
    out.U = std::move(U);
  } else if (arch.quadratic.kind == QuadraticSpec::Kind::LowRank) {
    out.F = mat(lay.F);
    out.diag = Vector(Eigen::Map<const Vector>(emitted.data() + lay.diag.offset, lay.diag.rows));
  }
  return out;
}

MaterializedLayers materialize_layers(const PcfArchitecture& arch, const Vector& w,
                                      const Vector& theta) {
  return blocks_from_emitted(arch, emitted_raw(arch, w, theta));
}

double quad_value(const MaterializedLayers& layers, const PcfArchitecture& arch, const Vector& x) {
  switch (arch.quadratic.kind) {
    case QuadraticSpec::Kind::None:
      return 0.0;
    case QuadraticSpec::Kind::Full:
      return (*layers.U * x).squaredNorm();
    case QuadraticSpec::Kind::LowRank:
      return (*layers.F * x).squaredNorm() +
             (layers.diag->cwiseProduct(x)).squaredNorm();
  }
  return 0.0;
}

Vector icnn_forward(const MaterializedLayers& layers, const PcfArchitecture& arch,
                    const Vector& x) {
  require_dim(x, arch.n, "x");
  require_finite(x, "x");
  const int L = arch.layers;
  Vector z;
  for (int l = 1; l < L; ++l) {
    Vector a = layers.V[static_cast<size_t>(l - 1)] * x + layers.omega[static_cast<size_t>(l - 1)];
    if (l >= 2) a.noalias() += layers.W[static_cast<size_t>(l - 2)] * z;
    z = a.unaryExpr([&](double v) { return activate(arch.activation, v); });
  }
  Vector y = layers.V[static_cast<size_t>(L - 1)] * x + layers.omega[static_cast<size_t>(L - 1)];
  y.noalias() += layers.W[static_cast<size_t>(L - 2)] * z;
  if (arch.quadratic.enabled()) y.array() += quad_value(layers, arch, x);
  return y;
}

Vector evaluate(const PcfModel& model, const Vector& x, const Vector& theta) {
  const PcfArchitecture& arch = model.arch;
  require_dim(x, arch.n, "x");
  require_dim(theta, arch.p, "theta");
  require_finite(x, "x");
  require_finite(theta, "theta");
  if (!model.weights.allFinite()) throw NonFiniteError("model weights contain non-finite values");
  Vector xs = x, ths = theta;
  if (model.scaling) {
    xs = standardize(x, model.scaling->x_shift, model.scaling->x_scale);
    ths = standardize(theta, model.scaling->theta_shift, model.scaling->theta_scale);
  }
  const MaterializedLayers layers = materialize_layers(arch, model.weights, ths);
  Vector y = icnn_forward(layers, arch, xs);
  if (model.scaling) y = y.cwiseProduct(model.scaling->y_scale) + model.scaling->y_shift;
  if (!y.allFinite()) throw NonFiniteError("evaluation produced a non-finite output");
  return y;
}

Matrix icnn_grad_x(const MaterializedLayers& layers, const PcfArchitecture& arch, const Vector& x) {
  require_dim(x, arch.n, "x");
  const int L = arch.layers;
  // J_l = d z^l / d x via the chain  J_l = diag(phi'(a_l)) (W_l J_{l-1} + V_l)
  Matrix J;  // n_l x n
  Vector z;
  for (int l = 1; l < L; ++l) {
    Vector a = layers.V[static_cast<size_t>(l - 1)] * x + layers.omega[static_cast<size_t>(l - 1)];
    Matrix M = layers.V[static_cast<size_t>(l - 1)];
    if (l >= 2) {
      a.noalias() += layers.W[static_cast<size_t>(l - 2)] * z;
      M.noalias() += layers.W[static_cast<size_t>(l - 2)] * J;
    }
    Vector dphi = a.unaryExpr([&](double v) { return activate_deriv(arch.activation, v); });
    J = dphi.asDiagonal() * M;
    z = a.unaryExpr([&](double v) { return activate(arch.activation, v); });
  }
  Matrix G = layers.V[static_cast<size_t>(L - 1)];
  G.noalias() += layers.W[static_cast<size_t>(L - 2)] * J;
  if (arch.quadratic.enabled()) {
    Vector qg = Vector::Zero(arch.n);  // gradient of x'Qx = 2 Q x
    if (arch.quadratic.kind == QuadraticSpec::Kind::Full) {
      qg = 2.0 * (layers.U->transpose() * (*layers.U * x));
    } else {
      qg = 2.0 * (layers.F->transpose() * (*layers.F * x));
      qg.array() += 2.0 * layers.diag->array().square() * x.array();
    }
    G.rowwise() += qg.transpose();
  }
  return G;
}

Matrix grad_x(const PcfModel& model, const Vector& x, const Vector& theta) {
  const PcfArchitecture& arch = model.arch;
  require_dim(x, arch.n, "x");
  require_dim(theta, arch.p, "theta");
  require_finite(x, "x");
  require_finite(theta, "theta");
  Vector xs = x, ths = theta;
  if (model.scaling) {
    xs = standardize(x, model.scaling->x_shift, model.scaling->x_scale);
    ths = standardize(theta, model.scaling->theta_shift, model.scaling->theta_scale);
  }
  const MaterializedLayers layers = materialize_layers(arch, model.weights, ths);
  Matrix G = icnn_grad_x(layers, arch, xs);
  if (model.scaling) {
    // f(x) = y_scale .* f_core((x - x_shift)./x_scale) + y_shift
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < G.cols(); ++j)
        G(i, j) *= model.scaling->y_scale[i] / model.scaling->x_scale[j];
  }
  return G;
}

Matrix evaluate_batch(const PcfModel& model, const Matrix& X, const Matrix& Theta) {
  if (X.rows() != Theta.rows())
    throw InvalidInput("evaluate_batch: X and Theta row counts differ");
  Matrix Y(X.rows(), model.arch.d);
  for (Eigen::Index k = 0; k < X.rows(); ++k)
    Y.row(k) = evaluate(model, X.row(k).transpose(), Theta.row(k).transpose()).transpose();
  return Y;
}

ScalingParams fit_scaling(const Matrix& X, const Matrix& Theta, const Matrix& Y) {
  auto stats = [](const Matrix& M, Vector& shift, Vector& scale) {
    shift = M.colwise().mean();
    scale.resize(M.cols());
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      const double var = (M.col(c).array() - shift[c]).square().mean();
      const double sd = std::sqrt(var);
      scale[c] = sd > 1e-12 ? sd : 1.0;  // constant columns pass through
    }
  };
  ScalingParams s;
  stats(X, s.x_shift, s.x_scale);
  stats(Theta, s.theta_shift, s.theta_scale);
  stats(Y, s.y_shift, s.y_scale);
  return s;
}

}  // namespace pcf
