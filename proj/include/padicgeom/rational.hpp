#pragma once

#include <gmpxx.h>

#include <string>

namespace padicgeom {

using Rational = mpq_class;

Rational pow(const Rational& base, long exponent);
Rational epsilon_pow(const Rational& q, long exponent);
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& value);
double to_double(const Rational& value);

}  // namespace padicgeom
