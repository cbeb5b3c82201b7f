#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairscope {

enum class ErrorKind {
  kParse,
  kDuplication,
  kInvalidScore,
  kTaxonomyMismatch,
  kEmptyGroup,
  kUndefinedRate,
  kIncompleteTable,
  kInfeasibleSplit,
  kInfeasibleClustering,
  kInfeasibleSelection,
  kCorruptedFixture,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure raised by the toolkit carries a kind so callers (the CLI in
// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fairscope
