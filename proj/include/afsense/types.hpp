// SPDX-License-Identifier: Apache-2.0
//
// afsense: indirect channel sensing for amplify-and-forward relay links.

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace afsense {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using Index = Eigen::Index;

// Scalar field of a generated signal or noise draw. The library stores
// everything as complex; `real` draws have zero imaginary part.
enum class Field { real, complex };

// ---------------------------------------------------------------------------
// Error hierarchy. Callers that need to distinguish failure classes catch the
// concrete type; everything derives from std::runtime_error / invalid_argument
// so generic handlers keep working.

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Finite SNR requested against an all-zero signal, and similar.
struct DegenerateInput : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inner linear solve of an iterative solver failed beyond ridge rescue.
struct SolverBreakdown : std::runtime_error {
  SolverBreakdown(const std::string& what, std::size_t iteration_index)
      : std::runtime_error(what), iteration(iteration_index) {}
  std::size_t iteration;
};

// Too many failed trials, unwritable output directory, and such.
struct ExperimentFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace afsense
