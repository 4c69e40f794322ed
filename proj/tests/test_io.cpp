#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "jm/io.hpp"

using namespace jm;

namespace {

Matrix parse(const std::string& text, InputMode mode = InputMode::PValue) {
    std::istringstream in(text);
    return parse_matrix(in, mode, "test");
}

std::string error_of(const std::string& text, InputMode mode = InputMode::PValue) {
    try {
        parse(text, mode);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Parse, SimpleCsv) {
    const Matrix m = parse("0.1,0.2\n0.6,0.2\n0.7,0.9");
    ASSERT_EQ(m.rows(), 3u);
    ASSERT_EQ(m.cols(), 2u);
    EXPECT_DOUBLE_EQ(m(1, 0), 0.6);
    EXPECT_DOUBLE_EQ(m(2, 1), 0.9);
}

TEST(Parse, HeaderTabsBlankLinesAndCrlf) {
    const Matrix m = parse("p1\tp2\r\n\r\n0.5\t1e-3\r\n 0.25 \t 1\r\n\n");
    ASSERT_EQ(m.rows(), 2u);
    EXPECT_DOUBLE_EQ(m(0, 1), 1e-3);
    EXPECT_DOUBLE_EQ(m(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(m(1, 1), 1.0);
}

TEST(Parse, ZValuesMayBeAnySign) {
    const Matrix m = parse("-3.5,+2\n0,7", InputMode::ZValue);
    EXPECT_DOUBLE_EQ(m(0, 0), -3.5);
    EXPECT_DOUBLE_EQ(m(0, 1), 2.0);
}

TEST(Parse, Errors) {
    EXPECT_NE(error_of("0.1,0.2\n0.3,1.5\n").find("test:2: column 2"), std::string::npos);
    EXPECT_NE(error_of("0.1,0.2\n0.3\n").find("test:2: expected 2 columns, found 1"), std::string::npos);
    EXPECT_NE(error_of("a,b\n0.1,x\n").find("test:2: column 2"), std::string::npos);
    EXPECT_NE(error_of("0.1,nan\n").find("not finite"), std::string::npos);
    EXPECT_NE(error_of("x,y\n").find("no data"), std::string::npos);
    EXPECT_NE(error_of("").find("no data"), std::string::npos);
    EXPECT_NE(error_of("-0.1\n").find("outside [0,1]"), std::string::npos);
    // A non-numeric row after the first data row is an error, not a header.
    EXPECT_NE(error_of("0.1\nheader\n").find("test:2"), std::string::npos);
    EXPECT_THROW(ingest("/nonexistent/file.csv", InputMode::PValue), InputError);
    EXPECT_THROW(parse_input_mode("other"), ConfigError);
}

TEST(RoundTrip, ExactDoubles) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix m(500, 4);
    for (auto& v : m.data()) v = std::pow(unit(rng), 20.0);
    m(0, 0) = std::numeric_limits<double>::denorm_min();
    m(0, 1) = 1.0;
    m(0, 2) = 0.0;
    m(0, 3) = std::nextafter(1.0, 0.0);
    std::stringstream buffer;
    write_matrix(buffer, m, ',', "a,b,c,d");
    EXPECT_EQ(parse_matrix(buffer, InputMode::PValue), m);

    std::stringstream tabbed;
    write_matrix(tabbed, m, '\t');
    EXPECT_EQ(parse_matrix(tabbed, InputMode::PValue), m);
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Ingest, LargeFileIsFast) {
    const std::size_t rows = 953154, cols = 8;
    const auto path = std::filesystem::temp_directory_path() / "jm_io_large.csv";
    {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Matrix m(rows, cols);
        for (auto& v : m.data()) v = unit(rng);
        std::ofstream out(path);
        write_matrix(out, m, ',', "p1,p2,p3,p4,p5,p6,p7,p8");
    }
    const auto start = std::chrono::steady_clock::now();
    const Matrix m = ingest(path, InputMode::PValue);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::filesystem::remove(path);
    EXPECT_EQ(m.rows(), rows);
    EXPECT_EQ(m.cols(), cols);
    EXPECT_LT(seconds, 30.0);
    std::printf("parsed %zu x %zu in %.2f s\n", rows, cols, seconds);
}
