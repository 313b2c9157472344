#ifndef MEME_ERROR_HPP
#define MEME_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace meme {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by pipelines that require a converged MaxEnt solve. Carries the
/// flagged result so callers can still inspect (or report) the best iterate.
template <typename Result>
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, Result result)
      : Error(what), result_(std::move(result)) {}

  const Result& result() const noexcept { return result_; }

 private:
  Result result_;
};

}  // namespace meme

#endif  // MEME_ERROR_HPP
