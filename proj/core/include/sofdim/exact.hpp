// Exact rational arithmetic helpers (Boost.Multiprecision cpp_rational).
#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace sofdim {

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = std::vector<std::vector<Rational>>;  // row-major

// Exact value of a finite double (every finite double is a dyadic rational).
Rational to_rational(double x);
double to_double(const Rational& r);
std::string to_string(const Rational& r);  // "p/q" or "p"

// Rank by Gaussian elimination over Q.
int rational_rank(RationalMatrix m);

}  // namespace sofdim
