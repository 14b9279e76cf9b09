#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "creditnet/error.hpp"

namespace creditnet {

// Token amounts are exact rationals.
using Tokens = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Tokens& t) { return t.convert_to<double>(); }

// Parses "12", "12.25", "1e3" style decimals or "p/q". Negative values are allowed
// here; callers enforce sign constraints.
inline Tokens parse_tokens(std::string_view text)
{
    auto fail = [&]() -> Tokens { throw InvalidInput("malformed token amount '" + std::string(text) + "'"); };
    if (text.empty()) return fail();
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        auto num = text.substr(0, slash);
        auto den = text.substr(slash + 1);
        auto digits_ok = [](std::string_view s, bool sign) {
            std::size_t i = 0;
            if (sign && !s.empty() && (s[0] == '-' || s[0] == '+')) i = 1;
            if (i >= s.size()) return false;
            for (; i < s.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
            return true;
        };
        if (!digits_ok(num, true) || !digits_ok(den, false)) return fail();
        BigInt d{std::string(den)};
        if (d == 0) return fail();
        if (num[0] == '+') num.remove_prefix(1);
        return Tokens(BigInt{std::string(num)}, d);
    }
    std::size_t i = 0;
    bool neg = false;
    if (text[0] == '-' || text[0] == '+') {
        neg = text[0] == '-';
        i = 1;
    }
    BigInt mant = 0;
    long long scale = 0;
    bool seen_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mant = mant * 10 + (c - '0');
            if (seen_dot) --scale;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) return fail();
    if (i < text.size()) {
        if (text[i] != 'e' && text[i] != 'E') return fail();
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
            eneg = text[i] == '-';
            ++i;
        }
        if (i >= text.size()) return fail();
        long long e = 0;
        for (; i < text.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i]))) return fail();
            e = e * 10 + (text[i] - '0');
            if (e > 4000) return fail();
        }
        scale += eneg ? -e : e;
    }
    Tokens value(mant);
    BigInt ten = 1;
    for (long long k = 0; k < (scale < 0 ? -scale : scale); ++k) ten *= 10;
    if (scale < 0)
        value /= Tokens(ten);
    else
        value *= Tokens(ten);
    return neg ? Tokens(-value) : value;
}

// Terminating decimals are written as decimals, anything else as "p/q".
inline std::string format_tokens(const Tokens& t)
{
    BigInt num = boost::multiprecision::numerator(t);
    BigInt den = boost::multiprecision::denominator(t);
    BigInt rest = den;
    int twos = 0, fives = 0;
    while (rest % 2 == 0) { rest /= 2; ++twos; }
    while (rest % 5 == 0) { rest /= 5; ++fives; }
    if (rest != 1) return num.str() + "/" + den.str();
    int places = twos > fives ? twos : fives;
    if (places == 0) return num.str();
    BigInt scaled = num;
    for (int k = 0; k < places; ++k) scaled *= 10;
    scaled /= den;
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string digits = scaled.str();
    if (digits.size() <= static_cast<std::size_t>(places))
        digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    return (neg ? "-" : "") + digits;
}

} // namespace creditnet
