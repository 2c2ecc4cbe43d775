#ifndef ZRP_OCCUPANCY_HPP
#define ZRP_OCCUPANCY_HPP

#include <cassert>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace zrp {

/// Occupation number in N ∪ {+∞}.
///
/// The infinite value is a dedicated sentinel (stored as -1) so it can never
/// be mistaken for a large particle count. Arithmetic follows the reservoir
/// conventions: ∞ + 1 = ∞ and ∞ - 1 = ∞.
class Occupancy {
 public:
  constexpr Occupancy() = default;
  constexpr explicit Occupancy(std::int64_t n) : n_(n) { assert(n >= 0); }

  static constexpr Occupancy infinite() {
    Occupancy o;
    o.n_ = kInfinite;
    return o;
  }

  constexpr bool is_infinite() const { return n_ == kInfinite; }
  constexpr bool is_zero() const { return n_ == 0; }

  /// Finite count. Precondition: !is_infinite().
  constexpr std::int64_t count() const {
    assert(!is_infinite());
    return n_;
  }

  constexpr Occupancy& operator++() {
    if (!is_infinite()) ++n_;
    return *this;
  }
  constexpr Occupancy& operator--() {
    assert(n_ != 0);
    if (!is_infinite()) --n_;
    return *this;
  }

  friend constexpr bool operator==(Occupancy a, Occupancy b) { return a.n_ == b.n_; }
  friend constexpr std::strong_ordering operator<=>(Occupancy a, Occupancy b) {
    if (a.is_infinite() || b.is_infinite()) {
      if (a.is_infinite() && b.is_infinite()) return std::strong_ordering::equal;
      return a.is_infinite() ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return a.n_ <=> b.n_;
  }

  /// "inf" for the sentinel, decimal otherwise.
  std::string to_string() const { return is_infinite() ? "inf" : std::to_string(n_); }
  static Occupancy parse(const std::string& s) {
    if (s == "inf") return infinite();
    const long long v = std::stoll(s);
    if (v < 0) throw std::invalid_argument("negative occupancy: " + s);
    return Occupancy(v);
  }

 private:
  static constexpr std::int64_t kInfinite = -1;
  std::int64_t n_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Occupancy o) { return os << o.to_string(); }

/// Signed integer extended by ±∞, used for cumulative counts and discrepancy
/// totals that may involve infinite occupancies.
class ExtendedInt {
 public:
  constexpr ExtendedInt() = default;
  constexpr ExtendedInt(std::int64_t v) : value_(v) {}  // NOLINT(implicit)

  static constexpr ExtendedInt plus_infinity() { return ExtendedInt(0, +1); }
  static constexpr ExtendedInt minus_infinity() { return ExtendedInt(0, -1); }
  static constexpr ExtendedInt from(Occupancy o) {
    return o.is_infinite() ? plus_infinity() : ExtendedInt(o.count());
  }

  constexpr bool is_finite() const { return inf_ == 0; }
  constexpr int infinity_sign() const { return inf_; }
  constexpr std::int64_t value() const {
    assert(is_finite());
    return value_;
  }

  friend ExtendedInt operator+(ExtendedInt a, ExtendedInt b) {
    if (a.inf_ != 0 && b.inf_ != 0 && a.inf_ != b.inf_)
      throw std::domain_error("indeterminate form: +inf + -inf");
    if (a.inf_ != 0) return a;
    if (b.inf_ != 0) return b;
    return ExtendedInt(a.value_ + b.value_);
  }
  friend ExtendedInt operator-(ExtendedInt a) { return ExtendedInt(-a.value_, -a.inf_); }
  friend ExtendedInt operator-(ExtendedInt a, ExtendedInt b) { return a + (-b); }

  friend constexpr bool operator==(ExtendedInt a, ExtendedInt b) {
    return a.inf_ == b.inf_ && (a.inf_ != 0 || a.value_ == b.value_);
  }
  friend constexpr std::strong_ordering operator<=>(ExtendedInt a, ExtendedInt b) {
    if (a.inf_ != b.inf_) return a.inf_ <=> b.inf_;
    if (a.inf_ != 0) return std::strong_ordering::equal;
    return a.value_ <=> b.value_;
  }

  std::string to_string() const {
    if (inf_ > 0) return "inf";
    if (inf_ < 0) return "-inf";
    return std::to_string(value_);
  }

 private:
  constexpr ExtendedInt(std::int64_t v, int inf) : value_(v), inf_(inf) {}
  std::int64_t value_ = 0;
  int inf_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, ExtendedInt v) { return os << v.to_string(); }

}  // namespace zrp

#endif  // ZRP_OCCUPANCY_HPP
