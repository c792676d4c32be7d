#include <catch2/catch_amalgamated.hpp>

#include "stag/common.hpp"
#include "stag/sha256.hpp"

using namespace stag;

TEST_CASE("iso timestamps parse", "[common]") {
    auto dt = parse_iso_datetime("2017-03-15T06:24:00");
    CHECK(dt.year == 2017);
    CHECK(dt.month == 3);
    CHECK(dt.day == 15);
    CHECK(dt.hour == 6);
    CHECK(dt.minute == 24);

    auto date_only = parse_iso_datetime("2013-01-02");
    CHECK(date_only.hour == 0);

    CHECK_THROWS_AS(parse_iso_datetime("2017-13-01T00:00"), DataError);
    CHECK_THROWS_AS(parse_iso_datetime("garbage"), DataError);
    CHECK_THROWS_AS(parse_iso_datetime("2017-03-15X06:24"), DataError);
}

TEST_CASE("civil day of week", "[common]") {
    CHECK(civil_day_of_week(2017, 3, 15) == DayOfWeek::We);
    CHECK(civil_day_of_week(2017, 1, 1) == DayOfWeek::Su);  // New Year 2017
    CHECK(civil_day_of_week(2013, 1, 1) == DayOfWeek::Tu);
    CHECK(std::string(to_string(DayOfWeek::Sa)) == "Sa");
    CHECK(day_of_week_from_string("Fr") == DayOfWeek::Fr);
    CHECK_FALSE(day_of_week_from_string("Xx").has_value());
}

// FIPS 180-4 test vectors.
TEST_CASE("sha256 known vectors", "[common]") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // exercise multi-block buffering
    std::string million(1000000, 'a');
    CHECK(sha256_hex(million) == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}
