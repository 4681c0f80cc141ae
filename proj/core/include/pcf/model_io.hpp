#pragma once

#include <string>

#include "pcf/model.hpp"

namespace pcf {

/// Versioned JSON model file. Weights are written as base-10 decimals with 17
/// significant digits, so save -> load -> save is byte-identical.
std::string model_to_json(const PcfModel& model);
void save_model(const PcfModel& model, const std::string& path);

/// Parses and validates a model file: format/version check, every dimension
/// equation, weight-vector length and finiteness. Errors carry a
/// JSON-pointer-style path to the offending element.
PcfModel model_from_json(const std::string& text);
PcfModel load_model(const std::string& path);

}  // namespace pcf
