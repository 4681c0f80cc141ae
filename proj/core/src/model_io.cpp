#include "pcf/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pcf {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vector(std::ostream& out, const Vector& v) {
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << fmt17(v[i]);
  out << ']';
}

using json = nlohmann::json;

const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key + ": missing");
  return *it;
}

int need_int(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_number_integer()) throw SchemaError(path + "/" + key + ": expected an integer");
  return v.get<int>();
}

bool need_bool(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_boolean()) throw SchemaError(path + "/" + key + ": expected a boolean");
  return v.get<bool>();
}

std::string need_str(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + "/" + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<int> need_int_array(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_array()) throw SchemaError(path + "/" + key + ": expected an array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw SchemaError(path + "/" + key + ": expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

Vector need_vector(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_array()) throw SchemaError(path + "/" + key + ": expected an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaError(path + "/" + key + "/" + std::to_string(i) + ": expected a number");
    out[i] = e.get<double>();
    if (!std::isfinite(out[i]))
      throw SchemaError(path + "/" + key + "/" + std::to_string(i) + ": non-finite value");
    ++i;
  }
  return out;
}

}  // namespace

std::string model_to_json(const PcfModel& model) {
  const PcfArchitecture& a = model.arch;
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"pcf-model\",\n";
  out << "  \"version\": " << kFormatVersion << ",\n";
  out << "  \"arch\": {\n";
  out << "    \"n\": " << a.n << ",\n";
  out << "    \"p\": " << a.p << ",\n";
  out << "    \"d\": " << a.d << ",\n";
  out << "    \"layers\": " << a.layers << ",\n";
  out << "    \"hidden_widths\": [";
  for (size_t i = 0; i < a.hidden_widths.size(); ++i) out << (i ? ", " : "") << a.hidden_widths[i];
  out << "],\n";
  out << "    \"activation\": \"" << to_string(a.activation) << "\",\n";
  out << "    \"psi_hidden\": [";
  for (size_t i = 0; i < a.psi_hidden.size(); ++i) out << (i ? ", " : "") << a.psi_hidden[i];
  out << "],\n";
  out << "    \"monotonicity\": [";
  for (size_t i = 0; i < a.monotonicity.size(); ++i)
    out << (i ? ", " : "") << '"' << to_string(a.monotonicity[i]) << '"';
  out << "],\n";
  out << "    \"quadratic\": {\"kind\": \"" << to_string(a.quadratic.kind)
      << "\", \"rank\": " << a.quadratic.rank << "},\n";
  out << "    \"scaling\": " << (a.scaling ? "true" : "false") << "\n";
  out << "  },\n";
  out << "  \"weights\": ";
  write_vector(out, model.weights);
  out << ",\n";
  out << "  \"scaling_params\": ";
  if (model.scaling) {
    out << "{\n";
    auto field = [&](const char* name, const Vector& v, bool last = false) {
      out << "    \"" << name << "\": ";
      write_vector(out, v);
      out << (last ? "\n" : ",\n");
    };
    field("x_shift", model.scaling->x_shift);
    field("x_scale", model.scaling->x_scale);
    field("theta_shift", model.scaling->theta_shift);
    field("theta_scale", model.scaling->theta_scale);
    field("y_shift", model.scaling->y_shift);
    field("y_scale", model.scaling->y_scale, true);
    out << "  }";
  } else {
    out << "null";
  }
  out << "\n}\n";
  return out.str();
}

void save_model(const PcfModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write model file: " + path);
  out << model_to_json(model);
}

PcfModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (need_str(doc, "format", "") != "pcf-model")
    throw SchemaError("/format: expected \"pcf-model\"");
  const int version = need_int(doc, "version", "");
  if (version != kFormatVersion)
    throw SchemaError("/version: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kFormatVersion) + ")");

  const json& ja = need(doc, "arch", "");
  PcfArchitecture arch;
  arch.n = need_int(ja, "n", "/arch");
  arch.p = need_int(ja, "p", "/arch");
  arch.d = need_int(ja, "d", "/arch");
  arch.layers = need_int(ja, "layers", "/arch");
  arch.hidden_widths = need_int_array(ja, "hidden_widths", "/arch");
  const std::string act = need_str(ja, "activation", "/arch");
  if (act == "relu") arch.activation = Activation::Relu;
  else if (act == "softplus") arch.activation = Activation::Softplus;
  else throw SchemaError("/arch/activation: unknown activation '" + act + "'");
  arch.psi_hidden = need_int_array(ja, "psi_hidden", "/arch");
  {
    const json& mono = need(ja, "monotonicity", "/arch");
    if (!mono.is_array()) throw SchemaError("/arch/monotonicity: expected an array");
    size_t i = 0;
    for (const auto& e : mono) {
      if (!e.is_string()) throw SchemaError("/arch/monotonicity/" + std::to_string(i) + ": expected a string");
      const std::string s = e.get<std::string>();
      if (s == "none") arch.monotonicity.push_back(Monotonicity::None);
      else if (s == "increasing") arch.monotonicity.push_back(Monotonicity::Increasing);
      else if (s == "decreasing") arch.monotonicity.push_back(Monotonicity::Decreasing);
      else throw SchemaError("/arch/monotonicity/" + std::to_string(i) + ": unknown mode '" + s + "'");
      ++i;
    }
  }
  {
    const json& jq = need(ja, "quadratic", "/arch");
    const std::string kind = need_str(jq, "kind", "/arch/quadratic");
    if (kind == "none") arch.quadratic.kind = QuadraticSpec::Kind::None;
    else if (kind == "full") arch.quadratic.kind = QuadraticSpec::Kind::Full;
    else if (kind == "low_rank") arch.quadratic.kind = QuadraticSpec::Kind::LowRank;
    else throw SchemaError("/arch/quadratic/kind: unknown kind '" + kind + "'");
    arch.quadratic.rank = need_int(jq, "rank", "/arch/quadratic");
  }
  arch.scaling = need_bool(ja, "scaling", "/arch");
  try {
    arch.validate();
  } catch (const InvalidInput& e) {
    throw SchemaError(std::string("/arch: ") + e.what());
  }

  PcfModel model;
  model.arch = arch;
  model.weights = need_vector(doc, "weights", "");
  const int expect = weight_count(arch);
  if (model.weights.size() != expect)
    throw SchemaError("/weights: length " + std::to_string(model.weights.size()) +
                      " does not match the architecture (expected " + std::to_string(expect) + ")");

  const json& js = need(doc, "scaling_params", "");
  if (js.is_null()) {
    if (arch.scaling)
      throw SchemaError("/scaling_params: null but /arch/scaling is true");
  } else {
    ScalingParams s;
    s.x_shift = need_vector(js, "x_shift", "/scaling_params");
    s.x_scale = need_vector(js, "x_scale", "/scaling_params");
    s.theta_shift = need_vector(js, "theta_shift", "/scaling_params");
    s.theta_scale = need_vector(js, "theta_scale", "/scaling_params");
    s.y_shift = need_vector(js, "y_shift", "/scaling_params");
    s.y_scale = need_vector(js, "y_scale", "/scaling_params");
    auto check_len = [](const Vector& v, int want, const std::string& path) {
      if (v.size() != want)
        throw SchemaError(path + ": length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(want));
    };
    check_len(s.x_shift, arch.n, "/scaling_params/x_shift");
    check_len(s.x_scale, arch.n, "/scaling_params/x_scale");
    check_len(s.theta_shift, arch.p, "/scaling_params/theta_shift");
    check_len(s.theta_scale, arch.p, "/scaling_params/theta_scale");
    check_len(s.y_shift, arch.d, "/scaling_params/y_shift");
    check_len(s.y_scale, arch.d, "/scaling_params/y_scale");
    for (Eigen::Index i = 0; i < s.x_scale.size(); ++i)
      if (s.x_scale[i] <= 0.0) throw SchemaError("/scaling_params/x_scale: entries must be > 0");
    for (Eigen::Index i = 0; i < s.y_scale.size(); ++i)
      if (s.y_scale[i] <= 0.0) throw SchemaError("/scaling_params/y_scale: entries must be > 0");
    for (Eigen::Index i = 0; i < s.theta_scale.size(); ++i)
      if (s.theta_scale[i] <= 0.0) throw SchemaError("/scaling_params/theta_scale: entries must be > 0");
    model.scaling = std::move(s);
  }
  return model;
}

PcfModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace pcf
