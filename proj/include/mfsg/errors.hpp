#pragma once

#include <stdexcept>
#include <string>

namespace mfsg {

// Exit-code class a failure maps to at the CLI boundary.
enum class ErrorClass { config = 2, condition = 3, numeric = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

#define MFSG_DEFINE_ERROR(Name, Class)                                              \
    class Name : public Error {                                                     \
    public:                                                                         \
        explicit Name(const std::string& what) : Error(ErrorClass::Class, what) {} \
    }

MFSG_DEFINE_ERROR(NonConvergence, numeric);
MFSG_DEFINE_ERROR(IndeterminateValue, numeric);
MFSG_DEFINE_ERROR(CoefficientOverflow, numeric);
MFSG_DEFINE_ERROR(NoRepellingFixedPoint, numeric);
MFSG_DEFINE_ERROR(NodeBudgetExceeded, numeric);
MFSG_DEFINE_ERROR(BracketFailure, numeric);
MFSG_DEFINE_ERROR(NotMonotone, numeric);
MFSG_DEFINE_ERROR(GridTooCoarse, numeric);
MFSG_DEFINE_ERROR(OutOfRange, numeric);
MFSG_DEFINE_ERROR(DegenerateFit, numeric);
MFSG_DEFINE_ERROR(InvalidEscapeRadius, config);
MFSG_DEFINE_ERROR(NotPolynomial, config);
MFSG_DEFINE_ERROR(InvalidArgument, config);
MFSG_DEFINE_ERROR(ConfigError, config);
MFSG_DEFINE_ERROR(ConditionFailure, condition);

#undef MFSG_DEFINE_ERROR

}  // namespace mfsg
