#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace tiar {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Failure modes surfaced by the solver stack. Each maps to one
/// exceptional situation named in the module contracts; recoverable
/// conditions (deflation, no-op truncation) are reported through return
/// values instead.
enum class ErrorCode {
  SingularM0,
  SpectrumOutsideDisk,
  SeriesDivergence,
  SingularS,
  Breakdown,
  LockRejected,
  SingularSchurBlock,
  NormalizationBreakdown,
  InvalidArgument,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

} // namespace tiar
