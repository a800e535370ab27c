#pragma once

#include <stdexcept>
#include <string>

namespace ncc {

/// Base of every error raised by the simulator and its protocols.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NCC_DEFINE_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    explicit Name(const std::string& what)  \
        : Error(#Name ": " + what) {}       \
  }

// engine
NCC_DEFINE_ERROR(BudgetViolation);
NCC_DEFINE_ERROR(MessageTooLarge);
NCC_DEFINE_ERROR(NonTermination);
NCC_DEFINE_ERROR(InvalidConfig);

// primitives
NCC_DEFINE_ERROR(OverloadedDestination);
NCC_DEFINE_ERROR(HExceeded);
NCC_DEFINE_ERROR(TooManyKeys);
NCC_DEFINE_ERROR(ExclusivityViolation);

// group communication
NCC_DEFINE_ERROR(MessageSizeTooLarge);
NCC_DEFINE_ERROR(ValueTooWide);
NCC_DEFINE_ERROR(NotSplittable);

// sketches
NCC_DEFINE_ERROR(SeedMismatch);
NCC_DEFINE_ERROR(PromiseViolated);

// forest
NCC_DEFINE_ERROR(UnevenDistribution);
NCC_DEFINE_ERROR(OverCapacity);
NCC_DEFINE_ERROR(RetryExhausted);

// cli
NCC_DEFINE_ERROR(InvalidParams);
NCC_DEFINE_ERROR(ParseError);

#undef NCC_DEFINE_ERROR

}  // namespace ncc
