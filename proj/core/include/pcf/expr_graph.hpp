#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcf/model.hpp"

namespace pcf {

/// A constant attached to a graph node: either inline values (bound-theta
/// mode, scaling constants) or a reference to a parameter-program output
/// (symbolic-theta mode).
struct ConstRef {
  Matrix value;    // used when param < 0
  int param = -1;  // parameter-program op id
  bool is_param() const { return param >= 0; }
  bool empty() const { return param < 0 && value.size() == 0; }
};

/// One op of the parameter-to-constant preamble (symbolic mode). The preamble
/// is evaluated outside the convex ruleset and must be recomputed whenever
/// theta changes.
struct ParamOp {
  enum class Kind { Parameter, Affine, Relu, Softplus, Head };
  enum class HeadShape { Dense, UpperTriangular, Diagonal };
  enum class HeadAct { Identity, Relu, NegRelu, PerColumn };

  Kind kind = Kind::Parameter;
  int id = 0;
  // Affine: sum of matrices[i] * values(children[i]) + offset
  std::vector<int> children;
  std::vector<Matrix> matrices;
  Vector offset;
  // Relu/Softplus: children[0]
  // Head: slice [begin, begin+rows*cols) of values(children[0]), reshaped
  int begin = 0, rows = 0, cols = 0;
  HeadShape shape = HeadShape::Dense;
  HeadAct act = HeadAct::Identity;
  std::vector<Monotonicity> col_modes;  // PerColumn only
};

/// One node of the convexity-certified expression DAG. Children are always
/// ids of earlier nodes; matrix/offset constants are attachments, not edges.
struct ExprNode {
  enum class Kind {
    Variable,           // the optimization variable x
    ParameterConstant,  // a constant vector
    Affine,             // matrix * child + offset; child must be affine
    NonnegMatmul,       // matrix * child, matrix certified elementwise >= 0
    Relu,
    Softplus,
    SumOfSquares,       // ||child||^2; child must be affine
    Add,                // sum of children, scalars broadcast
  };
  Kind kind = Kind::Variable;
  int id = 0;
  int dim = 0;  // output length (scalars have dim 1)
  std::vector<int> children;
  ConstRef matrix;
  ConstRef offset;  // Affine only; empty = zero
  ConstRef value;   // ParameterConstant only
};

struct GraphOutput {
  int node = 0;
  int component = 0;
};

enum class ExportMode { BoundTheta, SymbolicTheta };

struct ExprGraph {
  int n = 0, p = 0, d = 0;
  ExportMode mode = ExportMode::BoundTheta;
  std::vector<ParamOp> params;  // empty in bound mode
  std::vector<ExprNode> nodes;
  std::vector<GraphOutput> outputs;  // d roots
};

/// Exports the model as an expression graph. BoundTheta materializes the
/// per-theta weight blocks as constants (theta required); SymbolicTheta emits
/// the parameter network as a preamble feeding the same graph.
ExprGraph to_expr_graph(const PcfModel& model, ExportMode mode,
                        const std::optional<Vector>& theta = std::nullopt);

/// Runs the parameter program for theta (bound mode: returns empty).
std::vector<Matrix> eval_param_program(const ExprGraph& graph, const Vector& theta);

/// Evaluates the graph at (x, theta). In bound mode theta is ignored.
Vector eval_graph(const ExprGraph& graph, const Vector& x, const Vector& theta);

/// Structural convexity check: every node must be convex-preserving under the
/// composition rule (affine nodes take affine children, sum_of_squares takes
/// affine children, nonneg_matmul matrices are certified nonnegative, ...).
/// Throws InvalidInput on the first violation.
void validate_graph(const ExprGraph& graph);

/// Deterministic JSON rendering of the graph (schema documented in
/// docs/formats.md).
std::string graph_to_json(const ExprGraph& graph);
void save_graph(const ExprGraph& graph, const std::string& path);

/// Renders the graph against a text template (see docs/formats.md for the
/// template syntax). Throws EmissionError when the template lacks a section
/// for a node kind present in the graph.
std::string emit_code(const ExprGraph& graph, const std::string& template_text);

}  // namespace pcf
