#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pcf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class for all errors raised by the library.
class PcfError : public std::runtime_error {
 public:
  explicit PcfError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user input: dimension mismatches, invalid configuration, malformed data.
class InvalidInput : public PcfError {
 public:
  explicit InvalidInput(const std::string& msg) : PcfError(msg) {}
};

/// A NaN or infinity showed up where the computation requires finite values.
/// The message names the first offending stage (network layer, loss, ...).
class NonFiniteError : public PcfError {
 public:
  explicit NonFiniteError(const std::string& msg) : PcfError(msg) {}
};

/// Every training start diverged; no model could be produced.
class FitFailed : public PcfError {
 public:
  explicit FitFailed(const std::string& msg) : PcfError(msg) {}
};

/// Cross-validation could not score any hyper-parameter candidate.
class SelectionFailed : public PcfError {
 public:
  explicit SelectionFailed(const std::string& msg) : PcfError(msg) {}
};

/// A persisted file failed validation. The message carries a JSON-pointer-style
/// path to the offending element.
class SchemaError : public PcfError {
 public:
  explicit SchemaError(const std::string& msg) : PcfError(msg) {}
};

/// Code emission failed (e.g. the template lacks a section for a node kind).
class EmissionError : public PcfError {
 public:
  explicit EmissionError(const std::string& msg) : PcfError(msg) {}
};

/// A requested feature pairing is not supported (e.g. the gradient-matching
/// regularizer with a relu network).
class UnsupportedCombination : public PcfError {
 public:
  explicit UnsupportedCombination(const std::string& msg) : PcfError(msg) {}
};

}  // namespace pcf
