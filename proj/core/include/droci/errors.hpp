#pragma once

#include <stdexcept>
#include <string>

namespace droci {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};
struct UnknownDivergence : Error {
  using Error::Error;
};
struct DegenerateCressieReadParameter : Error {
  using Error::Error;
};
struct DerivativeUnavailable : Error {
  using Error::Error;
};
struct MinimizerNotFound : Error {
  using Error::Error;
};
struct SingularHessian : Error {
  using Error::Error;
};
struct DegenerateVariance : Error {
  using Error::Error;
};
struct MissingThirdOrderMoment : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct InfeasibleBall : Error {
  using Error::Error;
};
struct TargetUnreachable : Error {
  using Error::Error;
};
struct SingularWhitening : Error {
  using Error::Error;
};
struct EmptyData : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : Error("parse error at row " + std::to_string(row) + ", column " +
              std::to_string(col) + ": " + what),
        row(row),
        col(col) {}
  std::size_t row;
  std::size_t col;
};

}  // namespace droci
