#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <numeric>

#include "geodefault/csv.hpp"
#include "geodefault/error.hpp"
#include "geodefault/util.hpp"
#include "helpers.hpp"

using namespace geodefault;

TEST_CASE("format_double round-trips exactly") {
    for (const double v : {0.1, 1.0 / 3.0, 65025.0, -1e-300, 1e300, 0.3, 2922.0, 0.0, -0.25}) {
        const std::string s = format_double(v);
        CHECK(parse_double(s, "t") == v);
    }
}

TEST_CASE("parse_double and parse_int reject junk") {
    CHECK_THROWS_AS(parse_double("", "x"), Error);
    CHECK_THROWS_AS(parse_double("12a", "x"), Error);
    CHECK_THROWS_AS(parse_int("1.5", "x"), Error);
    CHECK(parse_int("-42", "x") == -42);
    try {
        parse_double("nope", "mse column");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("mse column") != std::string::npos);
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("csv parses quoting, CRLF, BOM, and blank lines") {
    const std::string text = "\xEF\xBB\xBFname,desc\r\n"
                             "a,\"x, y\"\r\n"
                             "\r\n"
                             "\"multi\nline\",\"say \"\"hi\"\"\"\n";
    const CsvTable t = parse_csv(text);
    REQUIRE(t.header == std::vector<std::string>{"name", "desc"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x, y");
    CHECK(t.rows[1][0] == "multi\nline");
    CHECK(t.rows[1][1] == "say \"hi\"");
    CHECK(t.column("desc") == 1);
    CHECK(t.has_column("name"));
    CHECK_FALSE(t.has_column("nope"));
    CHECK_THROWS_AS(t.column("nope"), Error);
}

TEST_CASE("csv errors carry line numbers") {
    try {
        parse_csv("a,b\n1,2\n3\n");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos); // row or line 3
    }
    CHECK_THROWS_AS(parse_csv(""), Error);
    CHECK_THROWS_AS(parse_csv("\n\n"), Error);
}

TEST_CASE("csv_line escapes what it must") {
    const std::string line = csv_line({"plain", "with,comma", "with\"quote", "with\nnewline"});
    const CsvTable t = parse_csv("h1,h2,h3,h4\n" + line);
    CHECK(t.rows[0] == std::vector<std::string>{"plain", "with,comma", "with\"quote", "with\nnewline"});
}

TEST_CASE("atomic_write_file leaves no temp file behind") {
    testutil::TempDir dir("util");
    const auto p = dir / "out.txt";
    atomic_write_file(p, std::string("hello"));
    CHECK(read_file_text(p) == "hello");
    atomic_write_file(p, std::string("rewritten"));
    CHECK(read_file_text(p) == "rewritten");
    int entries = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
        ++entries;
        CHECK(e.path().extension() != ".tmp");
    }
    CHECK(entries == 1);
}

TEST_CASE("read_file_bytes on missing file is an input error") {
    CHECK_THROWS_AS(read_file_bytes("/no/such/file/anywhere"), Error);
}

TEST_CASE("parallel_for covers every index once, any thread count") {
    for (const int threads : {1, 2, 4, 7}) {
        std::vector<std::atomic<int>> hits(257);
        for (auto& h : hits) h.store(0);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (const auto& h : hits) CHECK(h.load() == 1);
    }
}

TEST_CASE("parallel_for propagates the first exception") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                     if (i == 57) throw_internal("boom");
                                 }),
                    Error);
}
