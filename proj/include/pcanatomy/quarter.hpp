#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace pcanatomy {

/// Calendar quarter, stored as the single integer year*4 + (q-1) so that
/// lags and leads are plain integer arithmetic. The external form is the
/// string "YYYYqQ" (e.g. "2020q1"); nothing else is accepted.
class Quarter {
 public:
  Quarter() = default;
  Quarter(int year, int q);

  /// Parses "YYYYqQ" (the 'q' may be upper case). Throws DataError naming
  /// the offending token on malformed input or Q outside 1..4.
  static Quarter parse(std::string_view text);

  static Quarter from_index(int index) { return Quarter(index); }

  int year() const { return index_ >= 0 ? index_ / 4 : (index_ - 3) / 4; }
  int q() const { return index_ - year() * 4 + 1; }
  int index() const { return index_; }

  std::string str() const;

  Quarter operator+(int k) const { return Quarter(index_ + k); }
  Quarter operator-(int k) const { return Quarter(index_ - k); }
  int operator-(Quarter other) const { return index_ - other.index_; }
  Quarter& operator+=(int k) { index_ += k; return *this; }
  Quarter& operator++() { ++index_; return *this; }

  auto operator<=>(const Quarter&) const = default;

 private:
  explicit Quarter(int index) : index_(index) {}
  int index_ = 0;
};

}  // namespace pcanatomy
