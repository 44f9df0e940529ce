#include <catch2/catch_amalgamated.hpp>

#include "wdeg/config.hpp"

using wdeg::Config;

static const char* kSample = R"(
# a comment
[campaign]
count = 1000
p_values = 2, 2.5, 3
deterministic = true

[problem]
p = 2.0
boundary = manufactured
)";

TEST_CASE("config parsing") {
    const Config cfg = Config::parse_string(kSample);
    REQUIRE(cfg.get_integer("campaign", "count", 0) == 1000);
    REQUIRE(cfg.get_numbers("campaign", "p_values") ==
            std::vector<double>{2.0, 2.5, 3.0});
    REQUIRE(cfg.get_bool("campaign", "deterministic", false) == true);
    REQUIRE(cfg.get_string("problem", "boundary") == "manufactured");
    REQUIRE(cfg.get_number("problem", "p") == 2.0);
    REQUIRE(cfg.get_number("problem", "missing", 7.0) == 7.0);
}

TEST_CASE("config rejects malformed input") {
    REQUIRE_THROWS_AS(Config::parse_string("[unclosed\nkey = 1"), wdeg::config_error);
    REQUIRE_THROWS_AS(Config::parse_string("novalue"), wdeg::config_error);
    REQUIRE_THROWS_AS(Config::parse_string("a = 1\na = 2"), wdeg::config_error);
    REQUIRE_THROWS_AS(Config::parse_string("= 1"), wdeg::config_error);
    const Config cfg = Config::parse_string("[s]\nk = abc");
    REQUIRE_THROWS_AS(cfg.get_number("s", "k"), wdeg::config_error);
    REQUIRE_THROWS_AS(Config::parse_file("/nonexistent/path.ini"), wdeg::config_error);
}

TEST_CASE("unknown keys are rejected") {
    const Config cfg = Config::parse_string("[campaign]\ncount = 5\ntypo_key = 1");
    REQUIRE_THROWS_AS(cfg.restrict({{"campaign", {"count"}}}), wdeg::config_error);
    REQUIRE_NOTHROW(cfg.restrict({{"campaign", {"count", "typo_key"}}}));
    const Config other = Config::parse_string("[rogue]\nx = 1");
    REQUIRE_THROWS_AS(other.restrict({{"campaign", {"count"}}}), wdeg::config_error);
}
