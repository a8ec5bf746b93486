#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace evx::guard {

using Rational = boost::multiprecision::cpp_rational;

/// Probability that a responder guessing every symbol uniformly at random
/// reproduces the whole k-symbol string: exactly N^-k.
/// Throws BadConfig for N < 2 or k < 1.
Rational guess_success_probability(std::uint32_t N, std::uint32_t k);

/// Decimal rendering with `digits` significant digits, e.g. "8.27e-22".
std::string to_scientific(const Rational& p, int digits = 3);

}  // namespace evx::guard
