#ifndef QOED_ERROR_HPP_
#define QOED_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace qoed {

// Exception carrying a stable machine-readable code ("dim-mismatch",
// "zero-row", ...) alongside the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace qoed

#endif  // QOED_ERROR_HPP_
