// Shared vector types, error hierarchy and the random engine used by every module.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace shb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-run random stream. Sampling with a fixed seed is bitwise reproducible
/// for a given standard library implementation.
using Rng = std::mt19937_64;

/// Builds an engine from a 64-bit seed and a stream tag so that independent
/// streams (sample draws, initial points, probes) never overlap.
Rng make_rng(std::uint64_t seed, std::uint32_t stream = 0);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or configuration. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or exploding iterate.
class DivergedError : public Error {
 public:
  DivergedError(std::size_t iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

inline void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace shb
