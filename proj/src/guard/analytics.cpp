#include "evx/guard/analytics.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <iomanip>
#include <sstream>

#include "evx/guard/guard.hpp"

namespace evx::guard {

Rational guess_success_probability(std::uint32_t N, std::uint32_t k) {
    if (N < 2) throw BadConfig("N must be at least 2");
    if (k < 1) throw BadConfig("k must be at least 1");
    boost::multiprecision::cpp_int denom = boost::multiprecision::pow(boost::multiprecision::cpp_int(N), k);
    return Rational(1, denom);
}

std::string to_scientific(const Rational& p, int digits) {
    using Dec = boost::multiprecision::cpp_dec_float_50;
    const Dec v = Dec(numerator(p)) / Dec(denominator(p));
    std::ostringstream os;
    os << std::scientific << std::setprecision(digits - 1) << v;
    return os.str();
}

}  // namespace evx::guard
