//===--- result.hpp - Minimal expected-style result type ------------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace dfy {

/// Error-or-value carrier used across the toolchain. E defaults to a plain
/// diagnostic string.
template <typename T, typename E = std::string>
class Result {
public:
  Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}
  static Result err(E e) { return Result(tag{}, std::move(e)); }

  bool ok() const { return data_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T &value() {
    assert(ok());
    return std::get<0>(data_);
  }
  const T &value() const {
    assert(ok());
    return std::get<0>(data_);
  }
  const E &error() const {
    assert(!ok());
    return std::get<1>(data_);
  }

  T &operator*() { return value(); }
  const T &operator*() const { return value(); }
  T *operator->() { return &value(); }
  const T *operator->() const { return &value(); }

private:
  struct tag {};
  Result(tag, E e) : data_(std::in_place_index<1>, std::move(e)) {}
  std::variant<T, E> data_;
};

} // namespace dfy
