#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace upsilon {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational, used for schedule weights, probabilities and bounds.
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const BigInt& v) { return v.convert_to<double>(); }
inline double to_double(const Rat& r) { return r.convert_to<double>(); }

// A dyadic rational numerator / 2^exponent, kept normalized (odd numerator or
// exponent 0). Reward arithmetic stays in this form so cumulative sums and
// bound checks are exact integer operations.
class Dyadic {
public:
    Dyadic() : num_(0), exp_(0) {}

    Dyadic(BigInt numerator, unsigned exponent) : num_(std::move(numerator)), exp_(exponent) {
        normalize();
    }

    explicit Dyadic(long v) : num_(v), exp_(0) {}

    static Dyadic zero() { return Dyadic(); }
    static Dyadic one() { return Dyadic(1); }

    // 2^-k
    static Dyadic pow2(unsigned k) { return Dyadic(1, k); }

    const BigInt& numerator() const { return num_; }
    unsigned exponent() const { return exp_; }

    bool is_zero() const { return num_ == 0; }
    bool negative() const { return num_ < 0; }

    bool in_unit_interval() const { return num_ >= 0 && num_ <= (BigInt(1) << exp_); }

    Dyadic operator+(const Dyadic& o) const {
        unsigned e = std::max(exp_, o.exp_);
        return Dyadic((num_ << (e - exp_)) + (o.num_ << (e - o.exp_)), e);
    }

    Dyadic operator-(const Dyadic& o) const {
        unsigned e = std::max(exp_, o.exp_);
        return Dyadic((num_ << (e - exp_)) - (o.num_ << (e - o.exp_)), e);
    }

    Dyadic operator*(const Dyadic& o) const { return Dyadic(num_ * o.num_, exp_ + o.exp_); }

    Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }

    bool operator==(const Dyadic& o) const { return num_ == o.num_ && exp_ == o.exp_; }
    bool operator!=(const Dyadic& o) const { return !(*this == o); }

    bool operator<(const Dyadic& o) const {
        unsigned e = std::max(exp_, o.exp_);
        return (num_ << (e - exp_)) < (o.num_ << (e - o.exp_));
    }
    bool operator<=(const Dyadic& o) const { return !(o < *this); }
    bool operator>(const Dyadic& o) const { return o < *this; }
    bool operator>=(const Dyadic& o) const { return !(*this < o); }

    Dyadic abs() const { return num_ < 0 ? Dyadic(-num_, exp_) : *this; }

    Rat to_rat() const { return Rat(num_, BigInt(1) << exp_); }

    double to_double() const { return upsilon::to_double(to_rat()); }

    // Largest dyadic on the 2^-grid_exponent grid that is <= r. Requires r >= 0.
    static Dyadic floor_to_grid(const Rat& r, unsigned grid_exponent) {
        if (r < 0) throw std::invalid_argument("floor_to_grid: negative value");
        BigInt scaled =
            (boost::multiprecision::numerator(r) << grid_exponent) /
            boost::multiprecision::denominator(r);
        return Dyadic(scaled, grid_exponent);
    }

    // Quantization used at the reference-machine boundary: floor(v * 256)
    // clamped to a byte (so exactly 1.0 maps to 255).
    std::uint8_t to_byte_256() const {
        if (num_ < 0) return 0;
        BigInt scaled = exp_ >= 8 ? BigInt(num_ >> (exp_ - 8)) : BigInt(num_ << (8 - exp_));
        if (scaled > 255) return 255;
        return scaled.convert_to<std::uint8_t>();
    }

    // "0", "1", "n" for integers; otherwise "n/2^e" with n odd.
    std::string to_string() const {
        if (exp_ == 0) return num_.str();
        return num_.str() + "/2^" + std::to_string(exp_);
    }

private:
    void normalize() {
        if (num_ == 0) {
            exp_ = 0;
            return;
        }
        while (exp_ > 0 && (num_ & 1) == 0) {
            num_ >>= 1;
            --exp_;
        }
    }

    BigInt num_;
    unsigned exp_;
};

// Parses "a/b", "n", or a plain decimal like "0.95" into an exact rational.
inline Rat parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational");
    auto parse_int = [](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("bad rational component: '" + s + "'");
        return BigInt(s);
    };
    if (auto slash = text.find('/'); slash != std::string::npos) {
        BigInt num = parse_int(text.substr(0, slash));
        BigInt den = parse_int(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rat(num, den);
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
        std::string frac = text.substr(dot + 1);
        BigInt whole = dot == 0 ? BigInt(0) : parse_int(text.substr(0, dot));
        if (frac.empty()) return Rat(whole);
        BigInt digits = parse_int(frac);
        BigInt scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        return Rat(whole) + Rat(digits, scale);
    }
    return Rat(parse_int(text));
}

// Canonical "a/b" or "n" form.
inline std::string format_rational(const Rat& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace upsilon
