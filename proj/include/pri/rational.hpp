#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace pri {

// Exact arithmetic for golden values and identity checks.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace pri
