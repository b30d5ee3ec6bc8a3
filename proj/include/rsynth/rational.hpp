#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace rsynth {

// Exact rational arithmetic everywhere a value feeds a decision. cpp_rational
// keeps values normalized (lowest terms, positive denominator), so equality is
// structural. Doubles appear only in simulation statistics.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline BigInt numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool in_unit_interval(const Rational& q) { return q >= 0 && q <= 1; }

// "p", "-p", "p/q", or a decimal literal like "0.25" (kept exact: 25/100).
// Returns nullopt on anything else, including q == 0.
inline std::optional<Rational> parse_rational(const std::string& text) {
    auto digits = [](const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    std::string body = text;
    bool negative = false;
    if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
        negative = body[0] == '-';
        body = body.substr(1);
    }
    Rational value;
    if (auto slash = body.find('/'); slash != std::string::npos) {
        std::string num = body.substr(0, slash);
        std::string den = body.substr(slash + 1);
        if (!digits(num) || !digits(den)) return std::nullopt;
        BigInt d(den);
        if (d == 0) return std::nullopt;
        value = Rational(BigInt(num), d);
    } else if (auto dot = body.find('.'); dot != std::string::npos) {
        std::string whole = body.substr(0, dot);
        std::string frac = body.substr(dot + 1);
        if (whole.empty()) whole = "0";
        if (!digits(whole) || !digits(frac)) return std::nullopt;
        BigInt scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        value = Rational(BigInt(whole) * scale + BigInt(frac.empty() ? "0" : frac), scale);
    } else {
        if (!digits(body)) return std::nullopt;
        value = Rational(BigInt(body));
    }
    return negative ? Rational(-value) : value;
}

inline std::string to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

}  // namespace rsynth
