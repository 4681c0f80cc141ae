#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "pcf/expr_graph.hpp"

namespace pcf {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// vectors (single column) render flat, matrices as nested lists
std::string matrix_literal(const Matrix& m) {
  std::ostringstream out;
  if (m.cols() == 1) {
    out << '[';
    for (Eigen::Index r = 0; r < m.rows(); ++r) out << (r ? ", " : "") << fmt17(m(r, 0));
    out << ']';
    return out.str();
  }
  out << '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << (r ? ", [" : "[");
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? ", " : "") << fmt17(m(r, c));
    out << ']';
  }
  out << ']';
  return out.str();
}

using Sections = std::map<std::string, std::string>;

Sections parse_template(const std::string& text) {
  Sections sections;
  std::istringstream in(text);
  std::string line, current;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '@') {
      current = line.substr(1);
      while (!current.empty() && (current.back() == ' ' || current.back() == '\r'))
        current.pop_back();
      sections[current];  // create, possibly empty
      continue;
    }
    if (current.empty()) continue;  // text before the first section is ignored
    if (!line.empty() && line.back() == '\r') line.pop_back();
    sections[current] += line;
    sections[current] += '\n';
  }
  return sections;
}

using Vars = std::map<std::string, std::string>;

std::string substitute(const std::string& body, const Vars& vars) {
  std::string out;
  out.reserve(body.size());
  size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      const size_t end = body.find('}', i);
      if (end != std::string::npos) {
        const std::string key = body.substr(i + 1, end - i - 1);
        auto it = vars.find(key);
        if (it != vars.end()) {
          out += it->second;
          i = end + 1;
          continue;
        }
      }
    }
    out += body[i++];
  }
  return out;
}

struct Emitter {
  const ExprGraph& graph;
  const Sections& sections;
  Vars globals;

  const std::string& section(const std::string& name) const {
    auto it = sections.find(name);
    if (it == sections.end())
      throw EmissionError("template is missing section '@" + name + "' required by this graph");
    return it->second;
  }

  std::string render(const std::string& name, Vars vars) const {
    vars.insert(globals.begin(), globals.end());
    return substitute(section(name), vars);
  }

  std::string const_str(const ConstRef& ref) const {
    if (ref.is_param()) return render("param_ref", {{"id", std::to_string(ref.param)}});
    return render("matrix_literal", {{"data", matrix_literal(ref.value)},
                                     {"rows", std::to_string(ref.value.rows())},
                                     {"cols", std::to_string(ref.value.cols())}});
  }

  std::string offset_str(const ConstRef& ref) const {
    if (ref.empty()) {
      auto it = sections.find("zero");
      if (it == sections.end()) return "0";
      std::string z = it->second;
      while (!z.empty() && z.back() == '\n') z.pop_back();
      return z;
    }
    return const_str(ref);
  }
};

const char* node_section(ExprNode::Kind k) {
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

}  // namespace

std::string emit_code(const ExprGraph& graph, const std::string& template_text) {
  validate_graph(graph);
  const Sections sections = parse_template(template_text);
  Emitter em{graph, sections, {}};
  em.globals = {{"n", std::to_string(graph.n)},
                {"p", std::to_string(graph.p)},
                {"d", std::to_string(graph.d)},
                {"mode", graph.mode == ExportMode::BoundTheta ? "bound_theta" : "symbolic_theta"}};

  std::ostringstream out;
  if (sections.count("header")) out << em.render("header", {});

  for (const ParamOp& op : graph.params) {
    Vars v{{"id", std::to_string(op.id)}};
    switch (op.kind) {
      case ParamOp::Kind::Parameter:
        out << em.render("param_parameter", std::move(v));
        break;
      case ParamOp::Kind::Affine: {
        std::string terms;
        for (size_t t = 0; t < op.children.size(); ++t) {
          if (t) terms += " + ";
          terms += em.render("param_term",
                             {{"matrix", em.const_str({op.matrices[t], -1})},
                              {"child", std::to_string(op.children[t])}});
          while (!terms.empty() && terms.back() == '\n') terms.pop_back();
        }
        v["terms"] = terms;
        v["offset"] = em.offset_str(op.offset.size() > 0 ? ConstRef{Matrix(op.offset), -1} : ConstRef{});
        out << em.render("param_affine", std::move(v));
        break;
      }
      case ParamOp::Kind::Relu:
      case ParamOp::Kind::Softplus:
        v["child"] = std::to_string(op.children[0]);
        out << em.render(op.kind == ParamOp::Kind::Relu ? "param_relu" : "param_softplus",
                         std::move(v));
        break;
      case ParamOp::Kind::Head: {
        v["src"] = std::to_string(op.children[0]);
        v["begin"] = std::to_string(op.begin);
        v["rows"] = std::to_string(op.rows);
        v["cols"] = std::to_string(op.cols);
        switch (op.shape) {
          case ParamOp::HeadShape::Dense: v["shape"] = "dense"; break;
          case ParamOp::HeadShape::UpperTriangular: v["shape"] = "upper_triangular"; break;
          case ParamOp::HeadShape::Diagonal: v["shape"] = "diagonal"; break;
        }
        switch (op.act) {
          case ParamOp::HeadAct::Identity: v["act"] = "identity"; break;
          case ParamOp::HeadAct::Relu: v["act"] = "relu"; break;
          case ParamOp::HeadAct::NegRelu: v["act"] = "neg_relu"; break;
          case ParamOp::HeadAct::PerColumn: v["act"] = "per_column"; break;
        }
        std::string modes = "[";
        for (size_t c = 0; c < op.col_modes.size(); ++c) {
          modes += c ? ", " : "";
          modes += '"';
          modes += to_string(op.col_modes[c]);
          modes += '"';
        }
        modes += ']';
        v["col_modes"] = modes;
        out << em.render("param_head", std::move(v));
        break;
      }
    }
  }

  for (const ExprNode& node : graph.nodes) {
    Vars v{{"id", std::to_string(node.id)}, {"dim", std::to_string(node.dim)}};
    if (!node.children.empty()) v["child"] = std::to_string(node.children[0]);
    switch (node.kind) {
      case ExprNode::Kind::ParameterConstant:
        v["value"] = em.const_str(node.value);
        break;
      case ExprNode::Kind::Affine:
        v["matrix"] = em.const_str(node.matrix);
        v["offset"] = em.offset_str(node.offset);
        break;
      case ExprNode::Kind::NonnegMatmul:
        v["matrix"] = em.const_str(node.matrix);
        break;
      case ExprNode::Kind::Add: {
        std::string sum;
        for (size_t c = 0; c < node.children.size(); ++c) {
          if (c) sum += " + ";
          std::string piece =
              em.render("add_term", {{"child", std::to_string(node.children[c])}});
          while (!piece.empty() && piece.back() == '\n') piece.pop_back();
          sum += piece;
        }
        v["children_sum"] = sum;
        break;
      }
      default:
        break;
    }
    out << em.render(node_section(node.kind), std::move(v));
  }

  for (const GraphOutput& o : graph.outputs)
    out << em.render("output",
                     {{"node", std::to_string(o.node)}, {"component", std::to_string(o.component)}});

  if (sections.count("footer")) out << em.render("footer", {});
  return out.str();
}

}  // namespace pcf
