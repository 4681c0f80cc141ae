#include "pcf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pcf/activation.hpp"

namespace pcf {

namespace {

using ConstBlockMap = Eigen::Map<const RowMajorMatrix>;
using BlockMap = Eigen::Map<RowMajorMatrix>;

// Head transform applied to each emitted entry: identity, relu clamp, or
// negated relu clamp (decreasing-monotone V columns).
enum HeadCode : unsigned char { kIdentity = 0, kClamp = 1, kNegClamp = 2 };

struct Workspace {
  PcfArchitecture arch;
  EmittedLayout emit;
  PsiLayout psi;
  int L = 0, M = 0, n = 0, p = 0, d = 0, m = 0;
  std::vector<unsigned char> head;  // per emitted entry

  // batched parameter-network buffers (sized h_j x Bmax)
  std::vector<Matrix> S;    // pre-activations, S[j] for layer j = 1..M (S[M] = raw)
  std::vector<Matrix> Uact; // activations, Uact[j] for j = 1..M-1
  Matrix rawbar;            // m x Bmax adjoint of the raw emitted output
  Matrix Thb;               // p x B
  Matrix Xb;                // n x B
  Matrix gammaA, gammaB;    // backward scratch, max psi width x Bmax

  // per-sample convex-net buffers
  Vector blockbuf, blockgrad;            // m
  std::vector<Vector> a, z;              // layer pre-activations / activations, index l = 1..L-1
  Vector yhat, gybar;                    // d
  Vector delta, beta;                    // layer-width scratch
  Vector xk, yk, x0, qtilt;              // n / d / n / n
  Vector ux, vq, equad;                  // quadratic scratch (n or rank)
  Matrix Udense;                         // n x n (full quadratic)
  // gradient-matching scratch
  std::vector<Matrix> J, Mpre;           // n_l x n
  std::vector<Vector> a2, z2, dphi2;
  Matrix Gmat, E, Gbar, GbarNext, PM;
  Vector zbar, zbarNext, abar, svec;

  void init(const PcfArchitecture& arch_in, Eigen::Index Bmax) {
    arch = arch_in;
    emit = emitted_layout(arch);
    psi = psi_layout(arch);
    L = arch.layers;
    M = psi.depth();
    n = arch.n;
    p = arch.p;
    d = arch.d;
    m = emit.total;

    head.assign(static_cast<size_t>(m), kIdentity);
    for (const BlockInfo& b : emit.W)
      std::fill_n(head.begin() + b.offset, b.size(), kClamp);
    for (const BlockInfo& b : emit.V) {
      for (int r = 0; r < b.rows; ++r)
        for (int c = 0; c < b.cols; ++c) {
          const Monotonicity mode = arch.coord_mode(c);
          if (mode == Monotonicity::Increasing) head[static_cast<size_t>(b.offset + r * b.cols + c)] = kClamp;
          if (mode == Monotonicity::Decreasing) head[static_cast<size_t>(b.offset + r * b.cols + c)] = kNegClamp;
        }
    }

    S.resize(static_cast<size_t>(M + 1));
    Uact.resize(static_cast<size_t>(M));
    for (int j = 1; j <= M; ++j) {
      S[static_cast<size_t>(j)].resize(psi.widths[static_cast<size_t>(j)], Bmax);
      if (j < M) Uact[static_cast<size_t>(j)].resize(psi.widths[static_cast<size_t>(j)], Bmax);
    }
    rawbar.resize(m, Bmax);
    Thb.resize(p, Bmax);
    Xb.resize(n, Bmax);
    int max_h = 0;
    for (int j = 1; j <= M; ++j) max_h = std::max(max_h, psi.widths[static_cast<size_t>(j)]);
    gammaA.resize(max_h, Bmax);
    gammaB.resize(max_h, Bmax);

    blockbuf.resize(m);
    blockgrad.resize(m);
    a.resize(static_cast<size_t>(L));
    z.resize(static_cast<size_t>(L));
    int maxw = d;
    for (int l = 1; l < L; ++l) {
      a[static_cast<size_t>(l)].resize(arch.layer_width(l));
      z[static_cast<size_t>(l)].resize(arch.layer_width(l));
      maxw = std::max(maxw, arch.layer_width(l));
    }
    yhat.resize(d);
    gybar.resize(d);
    delta.resize(maxw);
    beta.resize(maxw);
    xk.resize(n);
    yk.resize(d);
    x0.resize(n);
    qtilt.resize(n);
    if (arch.quadratic.kind == QuadraticSpec::Kind::Full) {
      Udense.resize(n, n);
      ux.resize(n);
    } else if (arch.quadratic.kind == QuadraticSpec::Kind::LowRank) {
      ux.resize(arch.quadratic.rank);
    }
    vq.resize(n);
    equad.resize(n);

    J.resize(static_cast<size_t>(L));
    Mpre.resize(static_cast<size_t>(L));
    a2.resize(static_cast<size_t>(L));
    z2.resize(static_cast<size_t>(L));
    dphi2.resize(static_cast<size_t>(L));
    for (int l = 1; l < L; ++l) {
      J[static_cast<size_t>(l)].resize(arch.layer_width(l), n);
      Mpre[static_cast<size_t>(l)].resize(arch.layer_width(l), n);
      a2[static_cast<size_t>(l)].resize(arch.layer_width(l));
      z2[static_cast<size_t>(l)].resize(arch.layer_width(l));
      dphi2[static_cast<size_t>(l)].resize(arch.layer_width(l));
    }
    Gmat.resize(d, n);
    E.resize(d, n);
    Gbar.resize(maxw, n);
    GbarNext.resize(maxw, n);
    PM.resize(maxw, n);
    zbar.resize(maxw);
    zbarNext.resize(maxw);
    abar.resize(maxw);
    svec.resize(maxw);
  }

  int width(int l) const { return arch.layer_width(l); }

  ConstBlockMap Wv(int l) const {  // l = 2..L
    const BlockInfo& b = emit.W[static_cast<size_t>(l - 2)];
    return {blockbuf.data() + b.offset, b.rows, b.cols};
  }
  ConstBlockMap Vv(int l) const {  // l = 1..L
    const BlockInfo& b = emit.V[static_cast<size_t>(l - 1)];
    return {blockbuf.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<const Vector> Ov(int l) const {
    const BlockInfo& b = emit.omega[static_cast<size_t>(l - 1)];
    return {blockbuf.data() + b.offset, b.rows};
  }
  BlockMap Wg(int l) {
    const BlockInfo& b = emit.W[static_cast<size_t>(l - 2)];
    return {blockgrad.data() + b.offset, b.rows, b.cols};
  }
  BlockMap Vg(int l) {
    const BlockInfo& b = emit.V[static_cast<size_t>(l - 1)];
    return {blockgrad.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<Vector> Og(int l) {
    const BlockInfo& b = emit.omega[static_cast<size_t>(l - 1)];
    return {blockgrad.data() + b.offset, b.rows};
  }
};

ConstBlockMap w_block(const Vector& w, const BlockInfo& b) {
  return {w.data() + b.offset, b.rows, b.cols};
}
Eigen::Map<const Vector> w_vec(const Vector& w, const BlockInfo& b) {
  return {w.data() + b.offset, b.rows};
}
BlockMap g_block(Vector& g, const BlockInfo& b) { return {g.data() + b.offset, b.rows, b.cols}; }
Eigen::Map<Vector> g_vec(Vector& g, const BlockInfo& b) { return {g.data() + b.offset, b.rows}; }

// Batched parameter-network forward over block columns [0, B).
void psi_forward_block(Workspace& ws, const Vector& w, Eigen::Index B) {
  const PsiLayout& psi = ws.psi;
  const Activation act = ws.arch.activation;
  for (int j = 1; j <= ws.M; ++j) {
    Matrix& Sj = ws.S[static_cast<size_t>(j)];
    auto Sblk = Sj.leftCols(B);
    Sblk.colwise() = w_vec(w, psi.b[static_cast<size_t>(j - 1)]);
    if (ws.p > 0)
      Sblk.noalias() += w_block(w, psi.C[static_cast<size_t>(j - 1)]) * ws.Thb.leftCols(B);
    if (j >= 2)
      Sblk.noalias() +=
          w_block(w, psi.A[static_cast<size_t>(j - 2)]) * ws.Uact[static_cast<size_t>(j - 1)].leftCols(B);
    if (!Sblk.allFinite())
      throw NonFiniteError("non-finite value in parameter network layer " + std::to_string(j));
    if (j < ws.M) {
      ws.Uact[static_cast<size_t>(j)].leftCols(B) =
          Sblk.unaryExpr([act](double v) { return activate(act, v); });
    }
  }
}

// Batched parameter-network backward: consumes ws.rawbar, accumulates into g.
void psi_backward_block(Workspace& ws, const Vector& w, Eigen::Index B, Vector& g) {
  const PsiLayout& psi = ws.psi;
  const Activation act = ws.arch.activation;
  ws.gammaA.topRows(ws.m).leftCols(B) = ws.rawbar.leftCols(B);
  bool in_a = true;
  for (int j = ws.M; j >= 1; --j) {
    const int h = psi.widths[static_cast<size_t>(j)];
    auto gamma = (in_a ? ws.gammaA : ws.gammaB).topRows(h).leftCols(B);
    g_vec(g, psi.b[static_cast<size_t>(j - 1)]).noalias() += gamma.rowwise().sum();
    if (ws.p > 0)
      g_block(g, psi.C[static_cast<size_t>(j - 1)]).noalias() += gamma * ws.Thb.leftCols(B).transpose();
    if (j >= 2) {
      g_block(g, psi.A[static_cast<size_t>(j - 2)]).noalias() +=
          gamma * ws.Uact[static_cast<size_t>(j - 1)].leftCols(B).transpose();
      const int h_prev = psi.widths[static_cast<size_t>(j - 1)];
      auto next = (in_a ? ws.gammaB : ws.gammaA).topRows(h_prev).leftCols(B);
      next.noalias() = w_block(w, psi.A[static_cast<size_t>(j - 2)]).transpose() * gamma;
      next.array() *= ws.S[static_cast<size_t>(j - 1)]
                          .leftCols(B)
                          .array()
                          .unaryExpr([act](double v) { return activate_deriv(act, v); });
      in_a = !in_a;
    }
  }
}

// Applies head transforms to one raw column into ws.blockbuf.
void apply_heads(Workspace& ws, const Eigen::Ref<const Vector>& rawcol) {
  for (int i = 0; i < ws.m; ++i) {
    const double r = rawcol[i];
    switch (ws.head[static_cast<size_t>(i)]) {
      case kIdentity:
        ws.blockbuf[i] = r;
        break;
      case kClamp:
        ws.blockbuf[i] = r > 0.0 ? r : 0.0;
        break;
      case kNegClamp:
        ws.blockbuf[i] = r > 0.0 ? -r : 0.0;
        break;
    }
  }
}

// Chains ws.blockgrad through the head transforms into rawbar column k.
void heads_backward(Workspace& ws, const Eigen::Ref<const Vector>& rawcol, Eigen::Index k) {
  for (int i = 0; i < ws.m; ++i) {
    const double gv = ws.blockgrad[i];
    switch (ws.head[static_cast<size_t>(i)]) {
      case kIdentity:
        ws.rawbar(i, k) = gv;
        break;
      case kClamp:
        ws.rawbar(i, k) = rawcol[i] > 0.0 ? gv : 0.0;
        break;
      case kNegClamp:
        ws.rawbar(i, k) = rawcol[i] > 0.0 ? -gv : 0.0;
        break;
    }
  }
}

// Packed upper-triangular U: materialize dense and compute U * x.
void load_quad(Workspace& ws) {
  if (ws.arch.quadratic.kind == QuadraticSpec::Kind::Full) {
    ws.Udense.setZero();
    int k = ws.emit.U.offset;
    for (int i = 0; i < ws.n; ++i)
      for (int j = i; j < ws.n; ++j) ws.Udense(i, j) = ws.blockbuf[k++];
  }
}

double quad_value_ws(Workspace& ws, const Vector& x) {
  switch (ws.arch.quadratic.kind) {
    case QuadraticSpec::Kind::None:
      return 0.0;
    case QuadraticSpec::Kind::Full:
      ws.ux.noalias() = ws.Udense * x;
      return ws.ux.squaredNorm();
    case QuadraticSpec::Kind::LowRank: {
      const BlockInfo& bf = ws.emit.F;
      ConstBlockMap F(ws.blockbuf.data() + bf.offset, bf.rows, bf.cols);
      Eigen::Map<const Vector> c(ws.blockbuf.data() + ws.emit.diag.offset, ws.n);
      ws.ux.noalias() = F * x;
      return ws.ux.squaredNorm() + (c.cwiseProduct(x)).squaredNorm();
    }
  }
  return 0.0;
}

// d(x'Qx)/dU-entries scaled by `s`, accumulated into blockgrad. Call right
// after quad_value_ws so ws.ux holds U*x (or F*x).
void quad_backward_value(Workspace& ws, const Vector& x, double s) {
  if (s == 0.0) return;
  if (ws.arch.quadratic.kind == QuadraticSpec::Kind::Full) {
    int k = ws.emit.U.offset;
    for (int i = 0; i < ws.n; ++i)
      for (int j = i; j < ws.n; ++j) ws.blockgrad[k++] += 2.0 * s * ws.ux[i] * x[j];
  } else if (ws.arch.quadratic.kind == QuadraticSpec::Kind::LowRank) {
    const BlockInfo& bf = ws.emit.F;
    BlockMap Fg(ws.blockgrad.data() + bf.offset, bf.rows, bf.cols);
    Fg.noalias() += (2.0 * s) * ws.ux * x.transpose();
    Eigen::Map<const Vector> c(ws.blockbuf.data() + ws.emit.diag.offset, ws.n);
    Eigen::Map<Vector> cg(ws.blockgrad.data() + ws.emit.diag.offset, ws.n);
    cg.array() += (2.0 * s) * c.array() * x.array().square();
  }
}

// vq = 2 Q x (gradient of the quadratic term in x).
void quad_grad_x(Workspace& ws, const Vector& x) {
  if (ws.arch.quadratic.kind == QuadraticSpec::Kind::Full) {
    ws.ux.noalias() = ws.Udense * x;
    ws.vq.noalias() = 2.0 * (ws.Udense.transpose() * ws.ux);
  } else {
    const BlockInfo& bf = ws.emit.F;
    ConstBlockMap F(ws.blockbuf.data() + bf.offset, bf.rows, bf.cols);
    Eigen::Map<const Vector> c(ws.blockbuf.data() + ws.emit.diag.offset, ws.n);
    ws.ux.noalias() = F * x;
    ws.vq.noalias() = 2.0 * (F.transpose() * ws.ux);
    ws.vq.array() += 2.0 * c.array().square() * x.array();
  }
}

// Accumulates d(e' vq)/d(quad params) into blockgrad, where e is the adjoint
// of vq. Requires ws.ux to hold U*x (resp. F*x) for the same x.
void quad_backward_gradpath(Workspace& ws, const Vector& x, const Vector& e) {
  if (ws.arch.quadratic.kind == QuadraticSpec::Kind::Full) {
    // d/dU [2 e' U'U x] = 2 U (x e' + e x')
    int k = ws.emit.U.offset;
    for (int i = 0; i < ws.n; ++i) {
      for (int j = i; j < ws.n; ++j) {
        double acc = 0.0;
        for (int t = 0; t < ws.n; ++t)
          acc += ws.Udense(i, t) * (x[t] * e[j] + e[t] * x[j]);
        ws.blockgrad[k++] += 2.0 * acc;
      }
    }
  } else if (ws.arch.quadratic.kind == QuadraticSpec::Kind::LowRank) {
    const BlockInfo& bf = ws.emit.F;
    ConstBlockMap F(ws.blockbuf.data() + bf.offset, bf.rows, bf.cols);
    BlockMap Fg(ws.blockgrad.data() + bf.offset, bf.rows, bf.cols);
    Fg.noalias() += 2.0 * F * (x * e.transpose() + e * x.transpose());
    Eigen::Map<const Vector> c(ws.blockbuf.data() + ws.emit.diag.offset, ws.n);
    Eigen::Map<Vector> cg(ws.blockgrad.data() + ws.emit.diag.offset, ws.n);
    cg.array() += 4.0 * e.array() * c.array() * x.array();
  }
}

// Per-sample convex-net forward; fills ws.a, ws.z, ws.yhat.
void icnn_forward_sample(Workspace& ws, const Vector& x) {
  const Activation act = ws.arch.activation;
  const int L = ws.L;
  for (int l = 1; l < L; ++l) {
    Vector& al = ws.a[static_cast<size_t>(l)];
    al = ws.Ov(l);
    if (ws.n > 0) al.noalias() += ws.Vv(l) * x;
    if (l >= 2) al.noalias() += ws.Wv(l) * ws.z[static_cast<size_t>(l - 1)];
    ws.z[static_cast<size_t>(l)] = al.unaryExpr([act](double v) { return activate(act, v); });
  }
  ws.yhat = ws.Ov(L);
  if (ws.n > 0) ws.yhat.noalias() += ws.Vv(L) * x;
  ws.yhat.noalias() += ws.Wv(L) * ws.z[static_cast<size_t>(L - 1)];
  if (ws.arch.quadratic.enabled()) ws.yhat.array() += quad_value_ws(ws, x);
}

// Per-sample loss backward: consumes ws.gybar, accumulates into blockgrad.
void icnn_backward_sample(Workspace& ws, const Vector& x) {
  const Activation act = ws.arch.activation;
  const int L = ws.L;
  ws.Wg(L).noalias() += ws.gybar * ws.z[static_cast<size_t>(L - 1)].transpose();
  if (ws.n > 0) ws.Vg(L).noalias() += ws.gybar * x.transpose();
  ws.Og(L).noalias() += ws.gybar;
  if (ws.arch.quadratic.enabled()) quad_backward_value(ws, x, ws.gybar.sum());
  auto dl = ws.delta.head(ws.width(L - 1));
  dl.noalias() = ws.Wv(L).transpose() * ws.gybar;
  for (int l = L - 1; l >= 1; --l) {
    auto bl = ws.beta.head(ws.width(l));
    bl = ws.delta.head(ws.width(l)).cwiseProduct(
        ws.a[static_cast<size_t>(l)].unaryExpr([act](double v) { return activate_deriv(act, v); }));
    if (l >= 2) {
      ws.Wg(l).noalias() += bl * ws.z[static_cast<size_t>(l - 1)].transpose();
      ws.delta.head(ws.width(l - 1)).noalias() = ws.Wv(l).transpose() * bl;
    }
    if (ws.n > 0) ws.Vg(l).noalias() += bl * x.transpose();
    ws.Og(l).noalias() += bl;
  }
}

// Gradient-matching penalty for one sample: forward with the x-Jacobian
// recursion, returns the unweighted squared deviation ||Gmat - 1 q'||_F^2 and
// (optionally) backpropagates E = scale * (Gmat - 1 q') into blockgrad.
double argmin_penalty_sample(Workspace& ws, const Vector& x0, const Vector* qtilt, double scale,
                             bool want_grad) {
  const Activation act = ws.arch.activation;
  const int L = ws.L;
  for (int l = 1; l < L; ++l) {
    Vector& al = ws.a2[static_cast<size_t>(l)];
    Matrix& Ml = ws.Mpre[static_cast<size_t>(l)];
    al = ws.Ov(l);
    Ml = ws.Vv(l);
    if (ws.n > 0) al.noalias() += ws.Vv(l) * x0;
    if (l >= 2) {
      al.noalias() += ws.Wv(l) * ws.z2[static_cast<size_t>(l - 1)];
      Ml.noalias() += ws.Wv(l) * ws.J[static_cast<size_t>(l - 1)];
    }
    ws.dphi2[static_cast<size_t>(l)] =
        al.unaryExpr([act](double v) { return activate_deriv(act, v); });
    ws.J[static_cast<size_t>(l)] = ws.dphi2[static_cast<size_t>(l)].asDiagonal() * Ml;
    ws.z2[static_cast<size_t>(l)] = al.unaryExpr([act](double v) { return activate(act, v); });
  }
  ws.Gmat = ws.Vv(L);
  ws.Gmat.noalias() += ws.Wv(L) * ws.J[static_cast<size_t>(L - 1)];
  if (ws.arch.quadratic.enabled()) {
    load_quad(ws);
    quad_grad_x(ws, x0);
    ws.Gmat.rowwise() += ws.vq.transpose();
  }
  if (qtilt != nullptr) ws.Gmat.rowwise() -= qtilt->transpose();
  const double dev = ws.Gmat.squaredNorm();
  if (!want_grad || scale == 0.0) return dev;

  ws.E = scale * ws.Gmat;
  ws.Vg(L).noalias() += ws.E;
  ws.Wg(L).noalias() += ws.E * ws.J[static_cast<size_t>(L - 1)].transpose();
  if (ws.arch.quadratic.enabled()) {
    ws.equad.noalias() = ws.E.colwise().sum().transpose();
    quad_backward_gradpath(ws, x0, ws.equad);
  }
  auto gb = ws.Gbar.topRows(ws.width(L - 1));
  gb.noalias() = ws.Wv(L).transpose() * ws.E;
  ws.zbar.head(ws.width(L - 1)).setZero();
  for (int l = L - 1; l >= 1; --l) {
    const int wl = ws.width(l);
    auto Gb = ws.Gbar.topRows(wl);
    const Matrix& Ml = ws.Mpre[static_cast<size_t>(l)];
    auto sv = ws.svec.head(wl);
    sv = (Gb.array() * Ml.array()).rowwise().sum();
    auto ab = ws.abar.head(wl);
    ab = sv.cwiseProduct(ws.a2[static_cast<size_t>(l)].unaryExpr(
             [act](double v) { return activate_second(act, v); })) +
         ws.zbar.head(wl).cwiseProduct(ws.dphi2[static_cast<size_t>(l)]);
    auto pm = ws.PM.topRows(wl);
    pm = ws.dphi2[static_cast<size_t>(l)].asDiagonal() * Gb;
    if (l >= 2) {
      ws.Wg(l).noalias() += pm * ws.J[static_cast<size_t>(l - 1)].transpose();
      ws.Wg(l).noalias() += ab * ws.z2[static_cast<size_t>(l - 1)].transpose();
      ws.GbarNext.topRows(ws.width(l - 1)).noalias() = ws.Wv(l).transpose() * pm;
      ws.zbarNext.head(ws.width(l - 1)).noalias() = ws.Wv(l).transpose() * ab;
      ws.Gbar.topRows(ws.width(l - 1)) = ws.GbarNext.topRows(ws.width(l - 1));
      ws.zbar.head(ws.width(l - 1)) = ws.zbarNext.head(ws.width(l - 1));
    }
    if (ws.n > 0) {
      ws.Vg(l).noalias() += pm;
      ws.Vg(l).noalias() += ab * x0.transpose();
    }
    ws.Og(l).noalias() += ab;
  }
  return dev;
}

struct RunRequest {
  const Matrix* Y = nullptr;          // loss targets (enables the data term)
  const LossSpec* loss = nullptr;
  double rho = 0.0;                   // gradient-matching weight
  const Matrix* G = nullptr;          // argmin targets
  const Matrix* Q = nullptr;          // tilt targets (optional)
  Vector* grad = nullptr;             // accumulate gradient here when non-null
  Matrix* pred = nullptr;             // write predictions here when non-null
};

// Runs the batched objective over all samples. Returns the pair
// (mean data loss, mean penalty deviation * rho).
std::pair<double, double> run_blocks(Workspace& ws, const Vector& w, const Matrix& X,
                                     const Matrix& Theta, const RunRequest& req,
                                     Eigen::Index block_budget) {
  const Eigen::Index N = Theta.rows();
  if (N == 0) throw InvalidInput("objective: empty batch");
  const bool want_grad = req.grad != nullptr;
  const bool has_loss = req.Y != nullptr;
  const bool has_pen = req.rho > 0.0 && req.G != nullptr;
  const double inv_nd = has_loss ? 1.0 / static_cast<double>(N * ws.d) : 0.0;
  const double pen_scale = has_pen ? 2.0 * req.rho / static_cast<double>(N) : 0.0;
  if (req.pred != nullptr) req.pred->resize(N, ws.d);

  double loss_sum = 0.0;
  double pen_sum = 0.0;
  for (Eigen::Index start = 0; start < N; start += block_budget) {
    const Eigen::Index B = std::min(block_budget, N - start);
    ws.Thb.leftCols(B) = Theta.middleRows(start, B).transpose();
    if (has_loss || req.pred != nullptr) ws.Xb.leftCols(B) = X.middleRows(start, B).transpose();
    psi_forward_block(ws, w, B);
    const Matrix& raw = ws.S[static_cast<size_t>(ws.M)];

    for (Eigen::Index k = 0; k < B; ++k) {
      apply_heads(ws, raw.col(k));
      if (want_grad) ws.blockgrad.setZero();

      if (has_loss || req.pred != nullptr) {
        ws.xk = ws.Xb.col(k).head(ws.n);
        if (ws.arch.quadratic.enabled()) load_quad(ws);
        icnn_forward_sample(ws, ws.xk);
        if (!ws.yhat.allFinite()) {
          for (int l = 1; l < ws.L; ++l)
            if (!ws.a[static_cast<size_t>(l)].allFinite())
              throw NonFiniteError("non-finite value in convex network layer " + std::to_string(l));
          throw NonFiniteError("non-finite value in convex network layer " + std::to_string(ws.L));
        }
        if (req.pred != nullptr) req.pred->row(start + k) = ws.yhat.transpose();
        if (has_loss) {
          for (int c = 0; c < ws.d; ++c) {
            const double truth = (*req.Y)(start + k, c);
            loss_sum += loss_point(*req.loss, ws.yhat[c], truth);
            if (want_grad) ws.gybar[c] = inv_nd * loss_point_deriv(*req.loss, ws.yhat[c], truth);
          }
          if (want_grad) icnn_backward_sample(ws, ws.xk);
        }
      }

      if (has_pen) {
        ws.x0 = req.G->row(start + k).transpose();
        const Vector* qt = nullptr;
        if (req.Q != nullptr && req.Q->size() > 0) {
          ws.qtilt = req.Q->row(start + k).transpose();
          qt = &ws.qtilt;
        }
        pen_sum += argmin_penalty_sample(ws, ws.x0, qt, pen_scale, want_grad);
      }

      if (want_grad) heads_backward(ws, raw.col(k), k);
    }

    if (want_grad) psi_backward_block(ws, w, B, *req.grad);
  }

  const double mean_loss = has_loss ? loss_sum / static_cast<double>(N * ws.d) : 0.0;
  const double penalty = has_pen ? req.rho * pen_sum / static_cast<double>(N) : 0.0;
  return {mean_loss, penalty};
}

void check_dims(const PcfArchitecture& arch, const Vector& w, Eigen::Index n_cols_x,
                Eigen::Index n_cols_th) {
  if (n_cols_x != arch.n)
    throw InvalidInput("data has " + std::to_string(n_cols_x) + " x-columns, architecture expects n = " +
                       std::to_string(arch.n));
  if (n_cols_th != arch.p)
    throw InvalidInput("data has " + std::to_string(n_cols_th) +
                       " theta-columns, architecture expects p = " + std::to_string(arch.p));
  if (w.size() != weight_count(arch))
    throw InvalidInput("weight vector has length " + std::to_string(w.size()) + ", expected " +
                       std::to_string(weight_count(arch)));
}

void check_argmin_supported(const PcfArchitecture& arch, double rho) {
  if (rho > 0.0 && arch.activation == Activation::Relu)
    throw UnsupportedCombination(
        "the gradient-matching regularizer (rho_min > 0) requires the softplus activation; "
        "relu has no usable second derivative");
}

}  // namespace

std::pair<double, GradientBuffer> loss_and_grad(const PcfArchitecture& arch, const Vector& w,
                                                const Dataset& batch, const LossSpec& loss,
                                                const RegSpec& reg, int block_budget) {
  loss.validate();
  reg.validate();
  check_dims(arch, w, batch.X.cols(), batch.Theta.cols());
  if (batch.Y.cols() != arch.d)
    throw InvalidInput("data has " + std::to_string(batch.Y.cols()) +
                       " y-columns, architecture expects d = " + std::to_string(arch.d));
  if (loss.kind == LossSpec::Kind::Logistic) require_labels(batch.Y);
  Workspace ws;
  ws.init(arch, std::min<Eigen::Index>(block_budget, batch.size()));
  Vector grad = Vector::Zero(w.size());
  RunRequest req;
  req.Y = &batch.Y;
  req.loss = &loss;
  req.grad = &grad;
  auto [mean_loss, penalty] = run_blocks(ws, w, batch.X, batch.Theta, req, block_budget);
  double value = mean_loss + reg.lambda * reg.value(w);
  reg.add_grad(w, 1.0, grad);
  return {value, std::move(grad)};
}

std::pair<double, GradientBuffer> argmin_reg_and_grad(const PcfArchitecture& arch, const Vector& w,
                                                      const Matrix& thetas, const Matrix& g_targets,
                                                      const Matrix& tilt_targets, double rho_min,
                                                      int block_budget) {
  if (rho_min < 0.0) throw InvalidInput("rho_min must be >= 0");
  check_argmin_supported(arch, rho_min);
  check_dims(arch, w, g_targets.cols(), thetas.cols());
  if (g_targets.rows() != thetas.rows())
    throw InvalidInput("argmin targets and thetas have different sample counts");
  if (tilt_targets.size() > 0 &&
      (tilt_targets.rows() != thetas.rows() || tilt_targets.cols() != arch.n))
    throw InvalidInput("tilt targets must be N x n");
  Vector grad = Vector::Zero(w.size());
  if (rho_min == 0.0 || thetas.rows() == 0) return {0.0, std::move(grad)};
  Workspace ws;
  ws.init(arch, std::min<Eigen::Index>(block_budget, thetas.rows()));
  RunRequest req;
  req.rho = rho_min;
  req.G = &g_targets;
  req.Q = tilt_targets.size() > 0 ? &tilt_targets : nullptr;
  req.grad = &grad;
  const Matrix X_empty = Matrix::Zero(thetas.rows(), arch.n);
  auto [mean_loss, penalty] = run_blocks(ws, w, X_empty, thetas, req, block_budget);
  (void)mean_loss;
  return {penalty, std::move(grad)};
}

Matrix predict_core(const PcfArchitecture& arch, const Vector& w, const Matrix& X,
                    const Matrix& Theta, int block_budget) {
  check_dims(arch, w, X.cols(), Theta.cols());
  if (X.rows() != Theta.rows()) throw InvalidInput("X and Theta row counts differ");
  Workspace ws;
  ws.init(arch, std::min<Eigen::Index>(block_budget, X.rows()));
  Matrix pred;
  RunRequest req;
  req.pred = &pred;
  run_blocks(ws, w, X, Theta, req, block_budget);
  return pred;
}

struct ObjectiveFunction::Impl {
  PcfArchitecture arch;
  const Dataset& data;
  LossSpec loss;
  RegSpec reg;
  std::optional<ArgminData> argmin;
  Eigen::Index block_budget;
  Workspace ws;
  long evals = 0;

  Impl(const PcfArchitecture& arch_in, const Dataset& data_in, LossSpec loss_in, RegSpec reg_in,
       std::optional<ArgminData> argmin_in, int budget)
      : arch(arch_in),
        data(data_in),
        loss(std::move(loss_in)),
        reg(std::move(reg_in)),
        argmin(std::move(argmin_in)),
        block_budget(std::max<Eigen::Index>(1, budget)) {
    loss.validate();
    reg.validate();
    check_dims(arch, Vector::Zero(weight_count(arch)), data.X.cols(), data.Theta.cols());
    if (data.Y.cols() != arch.d)
      throw InvalidInput("data has " + std::to_string(data.Y.cols()) +
                         " y-columns, architecture expects d = " + std::to_string(arch.d));
    if (loss.kind == LossSpec::Kind::Logistic) require_labels(data.Y);
    if (argmin && reg.rho_min > 0.0) {
      check_argmin_supported(arch, reg.rho_min);
      if (argmin->g.rows() != data.size() || argmin->g.cols() != arch.n)
        throw InvalidInput("argmin targets must be N x n");
    }
    ws.init(arch, std::min<Eigen::Index>(block_budget, data.size()));
  }

  double eval(const Vector& w, Vector* grad) {
    ++evals;
    if (grad != nullptr) grad->setZero();
    RunRequest req;
    req.Y = &data.Y;
    req.loss = &loss;
    req.grad = grad;
    if (argmin && reg.rho_min > 0.0) {
      req.rho = reg.rho_min;
      req.G = &argmin->g;
      req.Q = argmin->q.size() > 0 ? &argmin->q : nullptr;
    }
    auto [mean_loss, penalty] = run_blocks(ws, w, data.X, data.Theta, req, block_budget);
    double value = mean_loss + penalty + reg.lambda * reg.value(w);
    if (grad != nullptr) reg.add_grad(w, 1.0, *grad);
    return value;
  }
};

ObjectiveFunction::ObjectiveFunction(const PcfArchitecture& arch, const Dataset& data,
                                     LossSpec loss, RegSpec reg, std::optional<ArgminData> argmin,
                                     int block_budget)
    : impl_(std::make_unique<Impl>(arch, data, std::move(loss), std::move(reg), std::move(argmin),
                                   block_budget)) {}

ObjectiveFunction::~ObjectiveFunction() = default;
ObjectiveFunction::ObjectiveFunction(ObjectiveFunction&&) noexcept = default;

double ObjectiveFunction::operator()(const Vector& w, Vector& grad) {
  if (grad.size() != w.size()) grad.resize(w.size());
  return impl_->eval(w, &grad);
}

double ObjectiveFunction::value(const Vector& w) { return impl_->eval(w, nullptr); }

long ObjectiveFunction::evals() const { return impl_->evals; }

}  // namespace pcf
