#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kpm {

// Exact rational arithmetic for threshold checks. All comparisons
// cross-multiply in 128 bits, so values stay exact as long as numerator and
// denominator fit in 64 bits, which the parameter ranges here never approach.
class Rational {
public:
    Rational() = default;
    Rational(long long value) : num_(value) {}  // NOLINT: implicit by design
    Rational(long long num, long long den) : num_(num), den_(den) {
        if (den_ == 0) throw std::invalid_argument("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    // Accepts "p" or "p/q".
    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return Rational(std::stoll(text));
            return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse rational: " + text);
        }
    }

    long long num() const { return num_; }
    long long den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    bool is_positive() const { return num_ > 0; }

    Rational operator+(const Rational& o) const { return {num_ * o.den_ + o.num_ * den_, den_ * o.den_}; }
    Rational operator-(const Rational& o) const { return {num_ * o.den_ - o.num_ * den_, den_ * o.den_}; }
    Rational operator*(const Rational& o) const { return {num_ * o.num_, den_ * o.den_}; }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw std::invalid_argument("rational division by zero");
        return {num_ * o.den_, den_ * o.num_};
    }

    bool operator==(const Rational& o) const { return cmp(o) == 0; }
    bool operator!=(const Rational& o) const { return cmp(o) != 0; }
    bool operator<(const Rational& o) const { return cmp(o) < 0; }
    bool operator<=(const Rational& o) const { return cmp(o) <= 0; }
    bool operator>(const Rational& o) const { return cmp(o) > 0; }
    bool operator>=(const Rational& o) const { return cmp(o) >= 0; }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    int cmp(const Rational& o) const {
        __int128 lhs = static_cast<__int128>(num_) * o.den_;
        __int128 rhs = static_cast<__int128>(o.num_) * den_;
        if (lhs < rhs) return -1;
        if (lhs > rhs) return 1;
        return 0;
    }

    long long num_ = 0;
    long long den_ = 1;
};

}  // namespace kpm
