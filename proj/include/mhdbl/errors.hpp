// Typed failures carrying the originating module and operation.
#pragma once

#include <stdexcept>
#include <string>

namespace mhdbl {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, std::string module, std::string op, const std::string& what)
      : std::runtime_error(module + "::" + op + ": " + kind + ": " + what),
        kind_(std::move(kind)),
        module_(std::move(module)),
        op_(std::move(op)) {}

  const std::string& kind() const { return kind_; }
  const std::string& module() const { return module_; }
  const std::string& op() const { return op_; }

 private:
  std::string kind_;
  std::string module_;
  std::string op_;
};

#define MHDBL_ERROR_KIND(Name)                                                    \
  class Name : public Error {                                                     \
   public:                                                                        \
    Name(const std::string& module, const std::string& op, const std::string& w) \
        : Error(#Name, module, op, w) {}                                          \
  };

MHDBL_ERROR_KIND(GridError)
MHDBL_ERROR_KIND(NonFinite)
MHDBL_ERROR_KIND(ConfigError)
MHDBL_ERROR_KIND(DependencyMissing)
MHDBL_ERROR_KIND(UnknownProfile)
MHDBL_ERROR_KIND(PositivityLost)
MHDBL_ERROR_KIND(NoConvergence)
MHDBL_ERROR_KIND(CompatibilityViolated)
MHDBL_ERROR_KIND(SolverDiverged)
MHDBL_ERROR_KIND(Degenerate)
MHDBL_ERROR_KIND(SolveFailure)
MHDBL_ERROR_KIND(RatioViolated)
MHDBL_ERROR_KIND(ContractionFailed)
MHDBL_ERROR_KIND(StructuralInconsistency)
MHDBL_ERROR_KIND(NonPositiveValue)

#undef MHDBL_ERROR_KIND

}  // namespace mhdbl
