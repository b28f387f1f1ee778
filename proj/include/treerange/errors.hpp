#pragma once

#include <stdexcept>
#include <string>

namespace treerange {

// Base for all library errors; `code` is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define TREERANGE_ERROR(NAME)                              \
  struct NAME : Error {                                    \
    explicit NAME(const std::string& what) : Error(#NAME, what) {} \
  }

TREERANGE_ERROR(NotNormalized);
TREERANGE_ERROR(NotCritical);
TREERANGE_ERROR(Degenerate);
TREERANGE_ERROR(NotAdapted);
TREERANGE_ERROR(DomainError);
TREERANGE_ERROR(InvalidPath);
TREERANGE_ERROR(CapExceeded);
TREERANGE_ERROR(InfeasibleSize);
TREERANGE_ERROR(InsufficientPrefix);
TREERANGE_ERROR(HTableMiss);
TREERANGE_ERROR(ParityError);
TREERANGE_ERROR(NonTransient);
TREERANGE_ERROR(BoxBudgetExceeded);
TREERANGE_ERROR(TooFewHits);
TREERANGE_ERROR(ConfigError);
TREERANGE_ERROR(ValidationError);
TREERANGE_ERROR(IoError);

#undef TREERANGE_ERROR

}  // namespace treerange
