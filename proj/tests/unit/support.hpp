#pragma once

#include <cmath>
#include <iomanip>
#include <string>

#include "doctest.h"

namespace soblab::test {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline std::string data_file(const std::string& name) {
  return std::string(SOBLAB_TEST_DATA) + "/" + name;
}

}  // namespace soblab::test

#define CHECK_REL(got, want, tol)                                   \
  do {                                                              \
    const double got_ = (got);                                      \
    const double want_ = (want);                                    \
    INFO("got " << got_ << " want " << want_);                      \
    CHECK(::soblab::test::rel_err(got_, want_) <= (tol));           \
  } while (0)
