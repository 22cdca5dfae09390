#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace vlc {

/// Reasons a validator, backend or protocol step can turn a request down.
/// Rejection is normal protocol flow, not an exception.
enum class Reject : uint8_t {
  InvalidInputClock = 1,
  PermissionDenied = 2,
  BadSignature = 3,
  StaleBase = 4,
  AppRuleViolation = 5,
  InsufficientQuorum = 6,
  InvalidProof = 7,
  Stale = 8,
  Duplicate = 9,
  NotUpToDate = 10,
  WrongOwner = 11,
  StaleRead = 12,
  CausalityViolated = 13,
  Livelock = 14,
  Unavailable = 15,
};

const char* to_string(Reject r);

struct Rejection {
  Reject code;
  std::string detail;
};

/// Minimal expected-like holder: either a value or a Rejection.
template <class T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Rejection r) : v_(std::move(r)) {}
  Result(Reject code, std::string detail = {}) : v_(Rejection{code, std::move(detail)}) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() {
    if (!ok()) throw std::logic_error("Result::value on rejection: " + error().detail);
    return std::get<T>(v_);
  }
  const T& value() const { return const_cast<Result*>(this)->value(); }
  T take() { return std::move(value()); }

  const Rejection& error() const { return std::get<Rejection>(v_); }
  Reject code() const { return error().code; }

 private:
  std::variant<T, Rejection> v_;
};

struct Unit {};

template <>
class Result<void> {
 public:
  Result() : rej_() {}
  Result(Rejection r) : rej_(std::move(r)) {}
  Result(Reject code, std::string detail = {}) : rej_(Rejection{code, std::move(detail)}) {}

  bool ok() const { return !rej_.has_value(); }
  explicit operator bool() const { return ok(); }
  const Rejection& error() const { return *rej_; }
  Reject code() const { return rej_->code; }

 private:
  std::optional<Rejection> rej_;
};

}  // namespace vlc
