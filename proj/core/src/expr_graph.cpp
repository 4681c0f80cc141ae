#include "pcf/expr_graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcf/activation.hpp"

namespace pcf {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct GraphBuilder {
  ExprGraph g;

  int add_node(ExprNode node) {
    node.id = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(node));
    return g.nodes.back().id;
  }
  int add_param(ParamOp op) {
    op.id = static_cast<int>(g.params.size());
    g.params.push_back(std::move(op));
    return g.params.back().id;
  }

  int variable(int dim) {
    ExprNode n;
    n.kind = ExprNode::Kind::Variable;
    n.dim = dim;
    return add_node(n);
  }
  int constant(const Vector& v) {
    ExprNode n;
    n.kind = ExprNode::Kind::ParameterConstant;
    n.dim = static_cast<int>(v.size());
    n.value.value = v;
    return add_node(n);
  }
  int affine(ConstRef A, ConstRef b, int child, int out_dim) {
    ExprNode n;
    n.kind = ExprNode::Kind::Affine;
    n.dim = out_dim;
    n.children = {child};
    n.matrix = std::move(A);
    n.offset = std::move(b);
    return add_node(n);
  }
  int nonneg_matmul(ConstRef M, int child, int out_dim) {
    ExprNode n;
    n.kind = ExprNode::Kind::NonnegMatmul;
    n.dim = out_dim;
    n.children = {child};
    n.matrix = std::move(M);
    return add_node(n);
  }
  int activation(Activation act, int child, int dim) {
    ExprNode n;
    n.kind = act == Activation::Relu ? ExprNode::Kind::Relu : ExprNode::Kind::Softplus;
    n.dim = dim;
    n.children = {child};
    return add_node(n);
  }
  int sum_of_squares(int child) {
    ExprNode n;
    n.kind = ExprNode::Kind::SumOfSquares;
    n.dim = 1;
    n.children = {child};
    return add_node(n);
  }
  int add(std::vector<int> children, int dim) {
    if (children.size() == 1) return children[0];
    ExprNode n;
    n.kind = ExprNode::Kind::Add;
    n.dim = dim;
    n.children = std::move(children);
    return add_node(n);
  }
};

// Supplies the weight-block constants, either inline (bound) or as
// parameter-program refs (symbolic).
struct BlockSource {
  std::vector<ConstRef> W, V, omega;
  ConstRef U, F, diag;
};

BlockSource bound_blocks(const PcfModel& model, const Vector& theta_core) {
  const MaterializedLayers layers = materialize_layers(model.arch, model.weights, theta_core);
  BlockSource src;
  for (const Matrix& m : layers.W) src.W.push_back({m, -1});
  for (const Matrix& m : layers.V) src.V.push_back({m, -1});
  for (const Vector& v : layers.omega) src.omega.push_back({Matrix(v), -1});
  if (layers.U) src.U = {*layers.U, -1};
  if (layers.F) src.F = {*layers.F, -1};
  if (layers.diag) src.diag = {Matrix(layers.diag->asDiagonal()), -1};
  return src;
}

BlockSource symbolic_blocks(GraphBuilder& gb, const PcfModel& model) {
  const PcfArchitecture& arch = model.arch;
  const PsiLayout psi = psi_layout(arch);
  const EmittedLayout lay = emitted_layout(arch);
  const Vector& w = model.weights;
  const int M = psi.depth();

  ParamOp theta_op;
  theta_op.kind = ParamOp::Kind::Parameter;
  int theta_id = gb.add_param(theta_op);

  int prev = -1;
  int raw_id = -1;
  for (int j = 1; j <= M; ++j) {
    ParamOp aff;
    aff.kind = ParamOp::Kind::Affine;
    if (j >= 2) {
      const BlockInfo& ab = psi.A[static_cast<size_t>(j - 2)];
      aff.children.push_back(prev);
      aff.matrices.emplace_back(
          Eigen::Map<const RowMajorMatrix>(w.data() + ab.offset, ab.rows, ab.cols));
    }
    const BlockInfo& cb = psi.C[static_cast<size_t>(j - 1)];
    aff.children.push_back(theta_id);
    aff.matrices.emplace_back(Eigen::Map<const RowMajorMatrix>(w.data() + cb.offset, cb.rows, cb.cols));
    const BlockInfo& bb = psi.b[static_cast<size_t>(j - 1)];
    aff.offset = Eigen::Map<const Vector>(w.data() + bb.offset, bb.rows);
    const int s_id = gb.add_param(aff);
    if (j < M) {
      ParamOp act;
      act.kind = arch.activation == Activation::Relu ? ParamOp::Kind::Relu : ParamOp::Kind::Softplus;
      act.children.push_back(s_id);
      prev = gb.add_param(act);
    } else {
      raw_id = s_id;
    }
  }

  auto head = [&](const BlockInfo& blk, ParamOp::HeadShape shape, ParamOp::HeadAct act,
                  int rows, int cols) {
    ParamOp op;
    op.kind = ParamOp::Kind::Head;
    op.children.push_back(raw_id);
    op.begin = blk.offset;
    op.rows = rows;
    op.cols = cols;
    op.shape = shape;
    op.act = act;
    if (act == ParamOp::HeadAct::PerColumn) op.col_modes = arch.monotonicity;
    return ConstRef{Matrix(), gb.add_param(op)};
  };

  const ParamOp::HeadAct v_act = arch.monotone() ? ParamOp::HeadAct::PerColumn : ParamOp::HeadAct::Identity;
  BlockSource src;
  for (size_t k = 0; k < lay.W.size(); ++k)
    src.W.push_back(head(lay.W[k], ParamOp::HeadShape::Dense, ParamOp::HeadAct::Relu,
                         lay.W[k].rows, lay.W[k].cols));
  for (size_t k = 0; k < lay.V.size(); ++k)
    src.V.push_back(head(lay.V[k], ParamOp::HeadShape::Dense, v_act, lay.V[k].rows, lay.V[k].cols));
  for (size_t k = 0; k < lay.omega.size(); ++k)
    src.omega.push_back(head(lay.omega[k], ParamOp::HeadShape::Dense, ParamOp::HeadAct::Identity,
                             lay.omega[k].rows, 1));
  if (arch.quadratic.kind == QuadraticSpec::Kind::Full)
    src.U = head(lay.U, ParamOp::HeadShape::UpperTriangular, ParamOp::HeadAct::Identity, arch.n, arch.n);
  if (arch.quadratic.kind == QuadraticSpec::Kind::LowRank) {
    src.F = head(lay.F, ParamOp::HeadShape::Dense, ParamOp::HeadAct::Identity, lay.F.rows, lay.F.cols);
    src.diag = head(lay.diag, ParamOp::HeadShape::Diagonal, ParamOp::HeadAct::Identity, arch.n, arch.n);
  }
  return src;
}

}  // namespace

ExprGraph to_expr_graph(const PcfModel& model, ExportMode mode,
                        const std::optional<Vector>& theta) {
  const PcfArchitecture& arch = model.arch;
  if (!model.weights.allFinite()) throw InvalidInput("cannot export a model with non-finite weights");
  GraphBuilder gb;
  gb.g.n = arch.n;
  gb.g.p = arch.p;
  gb.g.d = arch.d;
  gb.g.mode = mode;

  BlockSource src;
  if (mode == ExportMode::BoundTheta) {
    if (!theta) throw InvalidInput("bound-theta export requires a theta value");
    if (theta->size() != arch.p)
      throw InvalidInput("theta has length " + std::to_string(theta->size()) + ", expected p = " +
                         std::to_string(arch.p));
    Vector th = *theta;
    if (model.scaling)
      th = (th - model.scaling->theta_shift).cwiseQuotient(model.scaling->theta_scale);
    src = bound_blocks(model, th);
  } else {
    src = symbolic_blocks(gb, model);
  }

  const int L = arch.layers;
  const int x_id = gb.variable(arch.n);
  int xs_id = x_id;
  if (model.scaling) {
    // xs = diag(1/x_scale) x - x_shift ./ x_scale (affine, preserves convexity)
    Matrix S = model.scaling->x_scale.cwiseInverse().asDiagonal();
    Vector t = -model.scaling->x_shift.cwiseQuotient(model.scaling->x_scale);
    xs_id = gb.affine({S, -1}, {Matrix(t), -1}, x_id, arch.n);
  }

  int z_prev = -1;
  for (int l = 1; l < L; ++l) {
    const int width = arch.layer_width(l);
    const int aff = gb.affine(src.V[static_cast<size_t>(l - 1)], src.omega[static_cast<size_t>(l - 1)],
                              xs_id, width);
    int pre = aff;
    if (l >= 2) {
      const int mm = gb.nonneg_matmul(src.W[static_cast<size_t>(l - 2)], z_prev, width);
      pre = gb.add({mm, aff}, width);
    }
    z_prev = gb.activation(arch.activation, pre, width);
  }

  std::vector<int> terms;
  terms.push_back(gb.nonneg_matmul(src.W[static_cast<size_t>(L - 2)], z_prev, arch.d));
  terms.push_back(gb.affine(src.V[static_cast<size_t>(L - 1)], src.omega[static_cast<size_t>(L - 1)],
                            xs_id, arch.d));
  if (arch.quadratic.kind == QuadraticSpec::Kind::Full) {
    const int ux = gb.affine(src.U, ConstRef{}, xs_id, arch.n);
    terms.push_back(gb.sum_of_squares(ux));
  } else if (arch.quadratic.kind == QuadraticSpec::Kind::LowRank) {
    const int fx = gb.affine(src.F, ConstRef{}, xs_id, arch.quadratic.rank);
    terms.push_back(gb.sum_of_squares(fx));
    const int dx = gb.affine(src.diag, ConstRef{}, xs_id, arch.n);
    terms.push_back(gb.sum_of_squares(dx));
  }
  int y_id = gb.add(std::move(terms), arch.d);

  if (model.scaling) {
    // y = diag(y_scale) y_core + y_shift; positive scaling keeps convexity
    Matrix S = model.scaling->y_scale.asDiagonal();
    const int scaled = gb.nonneg_matmul({S, -1}, y_id, arch.d);
    const int shift = gb.constant(model.scaling->y_shift);
    y_id = gb.add({scaled, shift}, arch.d);
  }

  for (int i = 0; i < arch.d; ++i) gb.g.outputs.push_back({y_id, i});
  validate_graph(gb.g);
  return std::move(gb.g);
}

std::vector<Matrix> eval_param_program(const ExprGraph& graph, const Vector& theta) {
  std::vector<Matrix> vals(graph.params.size());
  for (const ParamOp& op : graph.params) {
    switch (op.kind) {
      case ParamOp::Kind::Parameter: {
        if (theta.size() != graph.p)
          throw InvalidInput("theta has length " + std::to_string(theta.size()) +
                             ", expected p = " + std::to_string(graph.p));
        vals[static_cast<size_t>(op.id)] = theta;
        break;
      }
      case ParamOp::Kind::Affine: {
        Vector acc = op.offset.size() > 0
                         ? op.offset
                         : Vector::Zero(op.matrices.empty() ? 0 : op.matrices[0].rows());
        for (size_t t = 0; t < op.children.size(); ++t)
          acc.noalias() += op.matrices[t] * vals[static_cast<size_t>(op.children[t])];
        vals[static_cast<size_t>(op.id)] = acc;
        break;
      }
      case ParamOp::Kind::Relu:
        vals[static_cast<size_t>(op.id)] = vals[static_cast<size_t>(op.children[0])].cwiseMax(0.0);
        break;
      case ParamOp::Kind::Softplus:
        vals[static_cast<size_t>(op.id)] =
            vals[static_cast<size_t>(op.children[0])].unaryExpr([](double v) { return softplus(v); });
        break;
      case ParamOp::Kind::Head: {
        const Matrix& raw = vals[static_cast<size_t>(op.children[0])];
        Vector seg = raw.col(0).segment(op.begin, op.shape == ParamOp::HeadShape::UpperTriangular
                                                      ? op.rows * (op.rows + 1) / 2
                                                      : (op.shape == ParamOp::HeadShape::Diagonal
                                                             ? op.rows
                                                             : op.rows * op.cols));
        Matrix out;
        if (op.shape == ParamOp::HeadShape::UpperTriangular) {
          out = Matrix::Zero(op.rows, op.cols);
          int k = 0;
          for (int i = 0; i < op.rows; ++i)
            for (int j = i; j < op.cols; ++j) out(i, j) = seg[k++];
        } else if (op.shape == ParamOp::HeadShape::Diagonal) {
          out = Matrix(seg.asDiagonal());
        } else {
          out = Eigen::Map<const RowMajorMatrix>(seg.data(), op.rows, op.cols);
        }
        switch (op.act) {
          case ParamOp::HeadAct::Identity:
            break;
          case ParamOp::HeadAct::Relu:
            out = out.cwiseMax(0.0);
            break;
          case ParamOp::HeadAct::NegRelu:
            out = -out.cwiseMax(0.0);
            break;
          case ParamOp::HeadAct::PerColumn:
            for (int c = 0; c < out.cols(); ++c) {
              const Monotonicity mode =
                  op.col_modes.empty() ? Monotonicity::None : op.col_modes[static_cast<size_t>(c)];
              if (mode == Monotonicity::Increasing) out.col(c) = out.col(c).cwiseMax(0.0);
              if (mode == Monotonicity::Decreasing) out.col(c) = -out.col(c).cwiseMax(0.0);
            }
            break;
        }
        vals[static_cast<size_t>(op.id)] = std::move(out);
        break;
      }
    }
  }
  return vals;
}

namespace {

Matrix resolve(const ConstRef& ref, const std::vector<Matrix>& params) {
  if (ref.is_param()) return params[static_cast<size_t>(ref.param)];
  return ref.value;
}

}  // namespace

Vector eval_graph(const ExprGraph& graph, const Vector& x, const Vector& theta) {
  if (x.size() != graph.n)
    throw InvalidInput("x has length " + std::to_string(x.size()) + ", expected n = " +
                       std::to_string(graph.n));
  const std::vector<Matrix> params =
      graph.mode == ExportMode::SymbolicTheta ? eval_param_program(graph, theta) : std::vector<Matrix>{};

  std::vector<Vector> vals(graph.nodes.size());
  for (const ExprNode& node : graph.nodes) {
    Vector& out = vals[static_cast<size_t>(node.id)];
    switch (node.kind) {
      case ExprNode::Kind::Variable:
        out = x;
        break;
      case ExprNode::Kind::ParameterConstant:
        out = resolve(node.value, params).col(0);
        break;
      case ExprNode::Kind::Affine: {
        const Matrix A = resolve(node.matrix, params);
        out = A * vals[static_cast<size_t>(node.children[0])];
        if (!node.offset.empty()) out += resolve(node.offset, params).col(0);
        break;
      }
      case ExprNode::Kind::NonnegMatmul:
        out = resolve(node.matrix, params) * vals[static_cast<size_t>(node.children[0])];
        break;
      case ExprNode::Kind::Relu:
        out = vals[static_cast<size_t>(node.children[0])].cwiseMax(0.0);
        break;
      case ExprNode::Kind::Softplus:
        out = vals[static_cast<size_t>(node.children[0])].unaryExpr([](double v) { return softplus(v); });
        break;
      case ExprNode::Kind::SumOfSquares:
        out = Vector::Constant(1, vals[static_cast<size_t>(node.children[0])].squaredNorm());
        break;
      case ExprNode::Kind::Add: {
        out = Vector::Zero(node.dim);
        for (int c : node.children) {
          const Vector& v = vals[static_cast<size_t>(c)];
          if (v.size() == node.dim)
            out += v;
          else if (v.size() == 1)
            out.array() += v[0];  // scalar broadcast
          else
            throw InvalidInput("add node " + std::to_string(node.id) + ": child dimension mismatch");
        }
        break;
      }
    }
  }
  Vector y(graph.outputs.size());
  for (size_t i = 0; i < graph.outputs.size(); ++i)
    y[static_cast<Eigen::Index>(i)] =
        vals[static_cast<size_t>(graph.outputs[i].node)][graph.outputs[i].component];
  return y;
}

void validate_graph(const ExprGraph& graph) {
  enum Curv { kConstant, kAffine, kConvex };
  std::vector<Curv> curv(graph.nodes.size(), kConstant);
  auto fail = [](const ExprNode& n, const std::string& why) {
    throw InvalidInput("expression graph node " + std::to_string(n.id) + ": " + why);
  };
  for (const ExprNode& node : graph.nodes) {
    for (int c : node.children)
      if (c < 0 || c >= node.id)
        fail(node, "children must reference earlier nodes (got " + std::to_string(c) + ")");
    switch (node.kind) {
      case ExprNode::Kind::Variable:
        curv[static_cast<size_t>(node.id)] = kAffine;
        break;
      case ExprNode::Kind::ParameterConstant:
        curv[static_cast<size_t>(node.id)] = kConstant;
        break;
      case ExprNode::Kind::Affine:
        if (curv[static_cast<size_t>(node.children[0])] == kConvex)
          fail(node, "affine nodes require an affine child (signed map of a convex child is not "
                     "convexity-preserving)");
        curv[static_cast<size_t>(node.id)] = kAffine;
        break;
      case ExprNode::Kind::NonnegMatmul: {
        if (!node.matrix.is_param()) {
          if (node.matrix.value.size() > 0 && node.matrix.value.minCoeff() < 0.0)
            fail(node, "nonneg_matmul matrix has a negative entry");
        } else {
          const ParamOp& op = graph.params[static_cast<size_t>(node.matrix.param)];
          const bool certified =
              (op.kind == ParamOp::Kind::Head && op.act == ParamOp::HeadAct::Relu) ||
              op.kind == ParamOp::Kind::Relu;
          if (!certified) fail(node, "nonneg_matmul matrix is not certified nonnegative");
        }
        curv[static_cast<size_t>(node.id)] = kConvex;
        break;
      }
      case ExprNode::Kind::Relu:
      case ExprNode::Kind::Softplus:
        // nondecreasing convex of convex
        curv[static_cast<size_t>(node.id)] = kConvex;
        break;
      case ExprNode::Kind::SumOfSquares:
        if (curv[static_cast<size_t>(node.children[0])] == kConvex)
          fail(node, "sum_of_squares requires an affine child");
        curv[static_cast<size_t>(node.id)] = kConvex;
        break;
      case ExprNode::Kind::Add:
        curv[static_cast<size_t>(node.id)] = kConvex;
        break;
    }
  }
  for (const GraphOutput& out : graph.outputs) {
    if (out.node < 0 || out.node >= static_cast<int>(graph.nodes.size()))
      throw InvalidInput("graph output references an unknown node");
    if (out.component < 0 || out.component >= graph.nodes[static_cast<size_t>(out.node)].dim)
      throw InvalidInput("graph output component out of range");
  }
}

namespace {

void write_matrix_json(std::ostream& out, const Matrix& m) {
  out << '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << (r ? ", [" : "[");
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? ", " : "") << fmt17(m(r, c));
    out << ']';
  }
  out << ']';
}

void write_constref(std::ostream& out, const ConstRef& ref) {
  if (ref.is_param()) {
    out << "{\"param\": " << ref.param << '}';
  } else {
    out << "{\"value\": ";
    write_matrix_json(out, ref.value);
    out << '}';
  }
}

const char* node_kind_name(ExprNode::Kind k) {
  switch (k) {
    case ExprNode::Kind::Variable: return "variable";
    case ExprNode::Kind::ParameterConstant: return "parameter_constant";
    case ExprNode::Kind::Affine: return "affine";
    case ExprNode::Kind::NonnegMatmul: return "nonneg_matmul";
    case ExprNode::Kind::Relu: return "relu";
    case ExprNode::Kind::Softplus: return "softplus";
    case ExprNode::Kind::SumOfSquares: return "sum_of_squares";
    case ExprNode::Kind::Add: return "add";
  }
  return "?";
}

const char* param_kind_name(ParamOp::Kind k) {
  switch (k) {
    case ParamOp::Kind::Parameter: return "parameter";
    case ParamOp::Kind::Affine: return "affine";
    case ParamOp::Kind::Relu: return "relu";
    case ParamOp::Kind::Softplus: return "softplus";
    case ParamOp::Kind::Head: return "head";
  }
  return "?";
}

const char* head_shape_name(ParamOp::HeadShape s) {
  switch (s) {
    case ParamOp::HeadShape::Dense: return "dense";
    case ParamOp::HeadShape::UpperTriangular: return "upper_triangular";
    case ParamOp::HeadShape::Diagonal: return "diagonal";
  }
  return "?";
}

const char* head_act_name(ParamOp::HeadAct a) {
  switch (a) {
    case ParamOp::HeadAct::Identity: return "identity";
    case ParamOp::HeadAct::Relu: return "relu";
    case ParamOp::HeadAct::NegRelu: return "neg_relu";
    case ParamOp::HeadAct::PerColumn: return "per_column";
  }
  return "?";
}

}  // namespace

std::string graph_to_json(const ExprGraph& graph) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"pcf-expr-graph\",\n  \"version\": 1,\n";
  out << "  \"mode\": \"" << (graph.mode == ExportMode::BoundTheta ? "bound_theta" : "symbolic_theta")
      << "\",\n";
  out << "  \"n\": " << graph.n << ", \"p\": " << graph.p << ", \"d\": " << graph.d << ",\n";
  out << "  \"parameter_program\": ";
  if (graph.params.empty()) {
    out << "null";
  } else {
    out << "[\n";
    for (size_t i = 0; i < graph.params.size(); ++i) {
      const ParamOp& op = graph.params[i];
      out << "    {\"id\": " << op.id << ", \"op\": \"" << param_kind_name(op.kind) << '"';
      if (!op.children.empty()) {
        out << ", \"children\": [";
        for (size_t c = 0; c < op.children.size(); ++c) out << (c ? ", " : "") << op.children[c];
        out << ']';
      }
      if (op.kind == ParamOp::Kind::Affine) {
        out << ", \"matrices\": [";
        for (size_t t = 0; t < op.matrices.size(); ++t) {
          out << (t ? ", " : "");
          write_matrix_json(out, op.matrices[t]);
        }
        out << "], \"offset\": ";
        write_matrix_json(out, Matrix(op.offset));
      }
      if (op.kind == ParamOp::Kind::Head) {
        out << ", \"begin\": " << op.begin << ", \"rows\": " << op.rows << ", \"cols\": " << op.cols
            << ", \"shape\": \"" << head_shape_name(op.shape) << "\", \"activation\": \""
            << head_act_name(op.act) << '"';
        if (op.act == ParamOp::HeadAct::PerColumn) {
          out << ", \"column_modes\": [";
          for (size_t c = 0; c < op.col_modes.size(); ++c)
            out << (c ? ", " : "") << '"' << to_string(op.col_modes[c]) << '"';
          out << ']';
        }
      }
      out << '}' << (i + 1 < graph.params.size() ? ",\n" : "\n");
    }
    out << "  ]";
  }
  out << ",\n  \"nodes\": [\n";
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const ExprNode& n = graph.nodes[i];
    out << "    {\"id\": " << n.id << ", \"kind\": \"" << node_kind_name(n.kind)
        << "\", \"dim\": " << n.dim;
    if (!n.children.empty()) {
      out << ", \"children\": [";
      for (size_t c = 0; c < n.children.size(); ++c) out << (c ? ", " : "") << n.children[c];
      out << ']';
    }
    if (n.kind == ExprNode::Kind::Affine || n.kind == ExprNode::Kind::NonnegMatmul) {
      out << ", \"matrix\": ";
      write_constref(out, n.matrix);
      if (!n.offset.empty()) {
        out << ", \"offset\": ";
        write_constref(out, n.offset);
      }
    }
    if (n.kind == ExprNode::Kind::ParameterConstant) {
      out << ", \"value\": ";
      write_constref(out, n.value);
    }
    out << '}' << (i + 1 < graph.nodes.size() ? ",\n" : "\n");
  }
  out << "  ],\n  \"outputs\": [";
  for (size_t i = 0; i < graph.outputs.size(); ++i)
    out << (i ? ", " : "") << "{\"node\": " << graph.outputs[i].node
        << ", \"component\": " << graph.outputs[i].component << '}';
  out << "]\n}\n";
  return out.str();
}

void save_graph(const ExprGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write graph file: " + path);
  out << graph_to_json(graph);
}

}  // namespace pcf
