#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace dh {

/// Invalid or incomplete run configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared during loss or gradient evaluation. Maps to CLI
/// exit code 3. Carries the offending epoch and batch index when known.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::optional<long> batch_index = {},
               std::optional<long> epoch = {});

  std::optional<long> batch_index() const { return batch_index_; }
  std::optional<long> epoch() const { return epoch_; }

 private:
  std::optional<long> batch_index_;
  std::optional<long> epoch_;
};

}  // namespace dh
