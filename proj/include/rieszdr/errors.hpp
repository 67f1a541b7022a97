#pragma once

#include <stdexcept>
#include <string>

namespace rieszdr {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCategory : int { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(ErrorCategory::Usage, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(ErrorCategory::Data, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorCategory::Numeric, m) {}
};

// Dataset validation.
struct NonBinaryTreatment : DataError {
  explicit NonBinaryTreatment(const std::string& m) : DataError(m) {}
};
struct EmptyArm : DataError {
  explicit EmptyArm(const std::string& m) : DataError(m) {}
};
struct NonFiniteValue : DataError {
  explicit NonFiniteValue(const std::string& m) : DataError(m) {}
};
struct BadFoldCount : DataError {
  explicit BadFoldCount(const std::string& m) : DataError(m) {}
};
struct TooFewSamples : DataError {
  explicit TooFewSamples(const std::string& m) : DataError(m) {}
};
struct InsufficientWaymarkSamples : DataError {
  explicit InsufficientWaymarkSamples(const std::string& m) : DataError(m) {}
};
struct EmptyArmInFold : DataError {
  explicit EmptyArmInFold(const std::string& m) : DataError(m) {}
};
struct SchemaMismatch : DataError {
  explicit SchemaMismatch(const std::string& m) : DataError(m) {}
};

// Loss/model evaluation outside the domain of the convex generator.
struct DomainError : NumericError {
  explicit DomainError(const std::string& m) : NumericError(m) {}
};
struct SingularSystem : NumericError {
  explicit SingularSystem(const std::string& m) : NumericError(m) {}
};
struct NonPositiveLambda : UsageError {
  explicit NonPositiveLambda(const std::string& m) : UsageError(m) {}
};
struct DegenerateDesign : UsageError {
  explicit DegenerateDesign(const std::string& m) : UsageError(m) {}
};

}  // namespace rieszdr
