#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vgvae {

/// Shapes of operands do not agree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (log of a
/// non-positive number, negative Bessel argument, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// NaN or other non-finite input where finite values are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller violated an API contract (e.g. backward on a non-scalar).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Malformed input text at a character offset.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset(offset) {}
  std::size_t offset;
};

/// Malformed data file (too many skipped lines, out-of-range values).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The vMF rejection loop or negative selection could not produce a draw.
struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pearson correlation of a constant series.
struct UndefinedCorrelation : std::domain_error {
  using std::domain_error::domain_error;
};

struct CheckpointError : std::runtime_error {
  CheckpointError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset(offset) {}
  std::size_t offset;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Training loss became NaN or infinite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vgvae
