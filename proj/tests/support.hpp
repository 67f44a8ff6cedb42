#pragma once
// Shared test helpers.

#include <gtest/gtest.h>

#include "gaudin/verify.hpp"

namespace gaudin::testing {

/// Every check in the report must pass; failures name the check.
inline void expect_all(const Report& r) {
  ASSERT_FALSE(r.checks().empty());
  for (const Check& c : r.checks())
    EXPECT_TRUE(c.pass()) << c.name << ": value " << c.value << (c.floor ? " < floor " : " > tol ") << c.tol;
}

template <class Fn>
ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a gaudin::Error";
  return ErrorKind::numerical;
}

}  // namespace gaudin::testing
