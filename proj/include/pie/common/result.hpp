// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace pie {

/// Every failure kind a simulator operation can report. The names are part of
/// the scenario file format (`expect_error`) and the trace log.
enum class Errc {
  ParseError,
  OverlapError,
  OutOfSpan,
  NoFreeEntry,
  NotMachineMode,
  UnknownEnclave,
  UnknownPeripheral,
  BadState,
  ThirdParty,
  MustSyncDisconnectFirst,
  BadRegionState,
  AccessFault,
  SignatureInvalid,
  Mismatch,
  NotDmaCapable,
  NotConnected,
  NoSession,
  NotAttested,
  DisconnectedError,
  InvalidArgument,
  ScenarioInvalid,
};

std::string_view to_string(Errc code);
std::optional<Errc> errc_from_string(std::string_view name);

struct Error {
  Errc code;
  std::string detail;
};

inline Error make_error(Errc code, std::string detail = {}) {
  return Error{code, std::move(detail)};
}

/// Thrown by Result::value() on an error result. Operations themselves never
/// throw for domain failures.
class BadResultAccess : public std::logic_error {
 public:
  explicit BadResultAccess(const Error& e)
      : std::logic_error(std::string(to_string(e.code)) + ": " + e.detail),
        code_(e.code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

template <class T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT(implicit)
  Result(Error error) : v_(std::move(error)) {}  // NOLINT(implicit)

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & {
    if (!ok()) throw BadResultAccess(std::get<1>(v_));
    return std::get<0>(v_);
  }
  const T& value() const& {
    if (!ok()) throw BadResultAccess(std::get<1>(v_));
    return std::get<0>(v_);
  }
  T&& value() && {
    if (!ok()) throw BadResultAccess(std::get<1>(v_));
    return std::get<0>(std::move(v_));
  }
  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const { return std::get<1>(v_); }
  Errc code() const { return std::get<1>(v_).code; }

 private:
  std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() = default;
  Result(Error error) : err_(std::move(error)) {}  // NOLINT(implicit)

  bool ok() const { return !err_.has_value(); }
  explicit operator bool() const { return ok(); }
  void value() const {
    if (err_) throw BadResultAccess(*err_);
  }
  const Error& error() const { return *err_; }
  Errc code() const { return err_->code; }

 private:
  std::optional<Error> err_;
};

using Status = Result<void>;

inline Status ok_status() { return {}; }

}  // namespace pie
