#pragma once

#include <stdexcept>
#include <string>

namespace robin {

/// Iteration budget exhausted; carries the last iterate.
template <typename Result>
class NotConverged : public std::runtime_error {
 public:
  NotConverged(const std::string& what, Result partial) : std::runtime_error(what), partial_(std::move(partial)) {}
  const Result& partial() const { return partial_; }

 private:
  Result partial_;
};

/// Backtracking failed to find a decrease; carries the last iterate.
template <typename Result>
class LineSearchStall : public NotConverged<Result> {
 public:
  using NotConverged<Result>::NotConverged;
};

}  // namespace robin
