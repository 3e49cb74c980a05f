#pragma once

#include <stdexcept>
#include <string>

namespace switchrate {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error { using Error::Error; };
class NoConvergence : public Error { using Error::Error; };
class DegenerateRoots : public Error { using Error::Error; };
class NotAFixedPoint : public Error { using Error::Error; };
class NotBistable : public Error { using Error::Error; };
class SingularDiffusion : public Error { using Error::Error; };
class BranchPoint : public Error { using Error::Error; };
class AllSamplesSkipped : public Error { using Error::Error; };
class DimensionOverflow : public Error { using Error::Error; };
class DegenerateZeroModes : public Error { using Error::Error; };
class NoCandidate : public Error { using Error::Error; };

class IterativeNoConvergence : public Error {
 public:
  IterativeNoConvergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Raised when adaptive integration collapses its step, usually because the
// trajectory is running off to infinity.
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(const std::string& what, double t_last)
      : Error(what), t_last_(t_last) {}
  double t_last() const { return t_last_; }

 private:
  double t_last_;
};

}  // namespace switchrate
