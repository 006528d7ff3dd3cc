#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pcanatomy/errors.hpp>
#include <pcanatomy/quarter.hpp>

using namespace pcanatomy;

TEST_CASE("construction and accessors") {
  Quarter q(2020, 1);
  CHECK(q.year() == 2020);
  CHECK(q.q() == 1);
  CHECK(q.str() == "2020q1");
  CHECK(Quarter(1999, 4).str() == "1999q4");
}

TEST_CASE("parse accepts YYYYqQ only") {
  CHECK(Quarter::parse("2020q1") == Quarter(2020, 1));
  CHECK(Quarter::parse("2020Q4") == Quarter(2020, 4));
  CHECK(Quarter::parse("0007q2") == Quarter(7, 2));

  CHECK_THROWS_AS(Quarter::parse("2020q5"), DataError);
  CHECK_THROWS_AS(Quarter::parse("2020q0"), DataError);
  CHECK_THROWS_AS(Quarter::parse("2020"), DataError);
  CHECK_THROWS_AS(Quarter::parse("2020-q1"), DataError);
  CHECK_THROWS_AS(Quarter::parse("q1"), DataError);
  CHECK_THROWS_AS(Quarter::parse(""), DataError);
  CHECK_THROWS_AS(Quarter::parse("2020q11"), DataError);
  CHECK_THROWS_AS(Quarter::parse(" 2020q1"), DataError);
}

TEST_CASE("parse error names the token") {
  try {
    Quarter::parse("20x0q1");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("20x0q1") != std::string::npos);
  }
}

TEST_CASE("arithmetic crosses year boundaries") {
  Quarter q(2019, 4);
  CHECK((q + 1) == Quarter(2020, 1));
  CHECK((q + 5) == Quarter(2021, 1));
  CHECK((q - 4) == Quarter(2018, 4));
  CHECK(Quarter(2020, 1) - Quarter(2019, 1) == 4);
  CHECK(Quarter(2019, 1) - Quarter(2020, 2) == -5);

  Quarter r(2000, 1);
  ++r;
  CHECK(r == Quarter(2000, 2));
  r += 3;
  CHECK(r == Quarter(2001, 1));
}

TEST_CASE("round trip through index and string") {
  for (int year : {1948, 2000, 2019, 2023}) {
    for (int p = 1; p <= 4; ++p) {
      Quarter q(year, p);
      CHECK(Quarter::from_index(q.index()) == q);
      CHECK(Quarter::parse(q.str()) == q);
    }
  }
}

TEST_CASE("ordering") {
  CHECK(Quarter(2019, 4) < Quarter(2020, 1));
  CHECK(Quarter(2020, 2) <= Quarter(2020, 2));
  CHECK(Quarter(2021, 1) > Quarter(2020, 4));
}
