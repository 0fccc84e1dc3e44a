#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "ccfir/config.hpp"

using namespace ccfir;

TEST_CASE("sections prefix keys and comments are stripped") {
    auto cfg = Config::parse_string(
        "top = 1\n"
        "[spectrum]\n"
        "center_hz = 10.5  # inline comment\n"
        "# full-line comment\n"
        "\n"
        "standardize = true\n"
        "[train]\n"
        "epochs = 60\n");
    CHECK(cfg.get_double("top") == 1.0);
    CHECK(cfg.get_double("spectrum.center_hz") == doctest::Approx(10.5));
    CHECK(cfg.get_bool("spectrum.standardize"));
    CHECK(cfg.get_u64("train.epochs") == 60);
    CHECK(cfg.entries().size() == 4);
}

TEST_CASE("typed getters validate and fall back") {
    auto cfg = Config::parse_string(
        "[a]\n"
        "num = -2.5e3\n"
        "count = 12\n"
        "flag_yes = yes\n"
        "flag_no = 0\n"
        "name = hello world\n"
        "list = 1, 2.5 ,3\n"
        "names = alpha,beta\n");
    CHECK(cfg.get_double("a.num") == doctest::Approx(-2500.0));
    CHECK(cfg.get_u64("a.count") == 12);
    CHECK(cfg.get_bool("a.flag_yes"));
    CHECK_FALSE(cfg.get_bool("a.flag_no"));
    CHECK(cfg.get_str("a.name") == "hello world");
    CHECK(cfg.get_double_list("a.list") == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(cfg.get_str_list("a.names") == std::vector<std::string>{"alpha", "beta"});

    CHECK(cfg.get_double("a.missing", 7.0) == 7.0);
    CHECK(cfg.get_u64("a.missing", 9) == 9);
    CHECK(cfg.get_bool("a.missing", true));
    CHECK(cfg.get_str("a.missing", "dflt") == "dflt");
    CHECK_FALSE(cfg.has("a.missing"));

    CHECK_THROWS_AS(cfg.get_double("a.name"), ConfigError);
    CHECK_THROWS_AS(cfg.get_u64("a.num"), ConfigError);
    CHECK_THROWS_AS(cfg.get_bool("a.count"), ConfigError);
    CHECK_THROWS_AS(cfg.get_str("a.absent"), ConfigError);
    CHECK_THROWS_AS(cfg.get_double_list("a.names"), ConfigError);
}

TEST_CASE("negative or partial numerics are rejected") {
    auto cfg = Config::parse_string("n = -3\npartial = 12abc\n");
    CHECK_THROWS_AS(cfg.get_u64("n"), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("partial"), ConfigError);
}

TEST_CASE("malformed lines raise with the line number") {
    CHECK_THROWS_WITH_AS(Config::parse_string("a = 1\nnonsense\n"),
                         "line 2: expected key = value", ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("= 1\n"), "line 1: empty key",
                         ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("[open\n"),
                         "line 1: unterminated section", ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("[]\n"), "line 1: empty section name",
                         ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("[s]\nk = 1\nk = 2\n"),
                         "line 3: duplicate key s.k", ConfigError);
}

TEST_CASE("empty list elements are rejected") {
    auto cfg = Config::parse_string("list = 1,,2\ntail = 1,\nblank = \n");
    CHECK_THROWS_AS(cfg.get_double_list("list"), ConfigError);
    CHECK_THROWS_AS(cfg.get_double_list("blank"), ConfigError);
    // a single trailing comma is tolerated
    CHECK(cfg.get_double_list("tail") == std::vector<double>{1.0});
}

TEST_CASE("require_known flags the first unknown key") {
    auto cfg = Config::parse_string("[s]\na = 1\nb = 2\n");
    CHECK_NOTHROW(cfg.require_known({"s.a", "s.b"}));
    CHECK_THROWS_WITH_AS(cfg.require_known({"s.a"}), "unknown config key: s.b",
                         ConfigError);
}

TEST_CASE("parse_file reads from disk and reports missing files") {
    const std::string path = "config_test_tmp.cfg";
    {
        std::ofstream out(path);
        out << "[x]\nv = 3\n";
    }
    auto cfg = Config::parse_file(path);
    CHECK(cfg.get_double("x.v") == 3.0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(Config::parse_file("definitely_not_there.cfg"), ConfigError);
}
