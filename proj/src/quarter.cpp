#include "pcanatomy/quarter.hpp"

#include <cctype>
#include <cstdio>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

Quarter::Quarter(int year, int q) {
  if (q < 1 || q > 4) {
    throw DataError("Quarter: q must be in 1..4, got " + std::to_string(q));
  }
  index_ = year * 4 + (q - 1);
}

Quarter Quarter::parse(std::string_view text) {
  auto fail = [&]() -> Quarter {
    throw DataError("Quarter: cannot parse '" + std::string(text) +
                    "', expected YYYYqQ (e.g. 2020q1)");
  };
  // YYYYqQ: digits, a literal 'q'/'Q', one digit.
  std::size_t pos = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos == 0 || pos + 2 != text.size()) return fail();
  char sep = text[pos];
  if (sep != 'q' && sep != 'Q') return fail();
  char qch = text[pos + 1];
  if (!std::isdigit(static_cast<unsigned char>(qch))) return fail();
  int q = qch - '0';
  if (q < 1 || q > 4) {
    throw DataError("Quarter: quarter digit " + std::string(1, qch) +
                    " outside 1..4 in '" + std::string(text) + "'");
  }
  int year = 0;
  for (std::size_t i = 0; i < pos; ++i) year = year * 10 + (text[i] - '0');
  return Quarter(year, q);
}

std::string Quarter::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04dq%d", year(), q());
  return buf;
}

}  // namespace pcanatomy
