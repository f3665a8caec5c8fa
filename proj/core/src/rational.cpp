#include "kdelab/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace kdelab {

namespace {

boost::multiprecision::cpp_int parse_integer(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("parse_rational: empty integer");
    std::size_t pos = 0;
    if (s[0] == '+' || s[0] == '-') pos = 1;
    if (pos == s.size()) throw std::invalid_argument("parse_rational: bad integer '" + s + "'");
    for (std::size_t i = pos; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            throw std::invalid_argument("parse_rational: bad integer '" + s + "'");
        }
    }
    // cpp_int reads a leading 0 as an octal prefix
    const bool negative = s[0] == '-';
    auto first = s.find_first_not_of('0', pos);
    boost::multiprecision::cpp_int v = first == std::string::npos ? 0 : boost::multiprecision::cpp_int(s.substr(first));
    return negative ? -v : v;
}

Rational parse_decimal(const std::string& s) {
    const auto e = s.find_first_of("eE");
    const std::string mantissa = s.substr(0, e);
    long exponent = 0;
    if (e != std::string::npos) exponent = std::stol(s.substr(e + 1));
    const auto dot = mantissa.find('.');
    std::string digits = mantissa;
    if (dot != std::string::npos) {
        digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
        exponent -= static_cast<long>(mantissa.size() - dot - 1);
    }
    if (digits.empty() || digits == "-" || digits == "+") digits += "0";
    Rational value(parse_integer(digits));
    boost::multiprecision::cpp_int scale = 1;
    for (long i = 0; i < (exponent < 0 ? -exponent : exponent); ++i) scale *= 10;
    return exponent < 0 ? value / Rational(scale) : value * Rational(scale);
}

}  // namespace

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        const Rational num = parse_decimal(s.substr(0, slash));
        const Rational den = parse_decimal(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
        return num / den;
    }
    return parse_decimal(s);
}

std::string to_string(const Rational& r) {
    return r.str();
}

double to_double(const Rational& r) {
    return r.convert_to<double>();
}

}  // namespace kdelab
