#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aircast {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Severity of a six-hour block, ordered from cheapest to most severe.
enum class AlertLevel : int {
  NoAlert = 0,
  PreWarning = 1,
  Warning = 2,
  Alert = 3,
};

constexpr int kNumLevels = 4;

inline int level_index(AlertLevel level) { return static_cast<int>(level); }

AlertLevel level_from_index(int index);

const char* to_string(AlertLevel level);

// Quarters of a civil day: I = 00-06, II = 06-12, III = 12-18, IV = 18-24.
enum class Block : int {
  I = 1,
  II = 2,
  III = 3,
  IV = 4,
};

constexpr int kBlockHours = 6;

inline int block_start_hour(Block block) {
  return (static_cast<int>(block) - 1) * kBlockHours;
}

Block block_from_index(int index);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external input (CSV, config, serialized artifacts).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Numeric failure during training or inference.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace aircast
