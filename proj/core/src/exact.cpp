#include "sofdim/exact.hpp"

#include <cmath>
#include <stdexcept>

#include "sofdim/core.hpp"

namespace sofdim {

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw ParameterError("to_rational: value is not finite");
  if (x == 0) return Rational(0);
  int exp = 0;
  const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5,1)
  // 53 significant bits fit exactly in a 64-bit integer.
  const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(scaled);
  exp -= 53;
  boost::multiprecision::cpp_int pow2 = 1;
  pow2 <<= std::abs(exp);
  return exp >= 0 ? r * Rational(pow2) : r / Rational(pow2);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

int rational_rank(RationalMatrix m) {
  const std::size_t rows = m.size();
  if (rows == 0) return 0;
  const std::size_t cols = m[0].size();
  for (const auto& row : m)
    if (row.size() != cols) throw DimensionError("rational_rank: ragged matrix");
  int rank = 0;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == 0) continue;
      const Rational f = m[i][c] / m[r][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
    ++rank;
  }
  return rank;
}

}  // namespace sofdim
