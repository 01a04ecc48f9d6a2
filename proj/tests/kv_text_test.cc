// Copyright 2026 The trilink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trilink/kv_text.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>

#include "trilink/errors.h"

using namespace trilink;

TEST(format_double, round_trips_with_17_digits) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 10000; ++i) {
        double x = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
        EXPECT_EQ(parse_double(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.72), "0.71999999999999997");
    EXPECT_EQ(format_double(3.0), "3");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_TRUE(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST(parse_numbers, rejects_garbage) {
    EXPECT_EQ(parse_double(" 2.5 "), 2.5);
    EXPECT_EQ(parse_int("-17"), -17);
    EXPECT_EQ(parse_uint("18446744073709551615"), 18446744073709551615ull);
    for (const char *bad : {"", "abc", "1.5x", "--1"}) {
        try {
            parse_double(bad);
            ADD_FAILURE() << bad;
        } catch (const Error &e) {
            EXPECT_EQ(e.code(), ErrorCode::kConfig);
        }
    }
    EXPECT_THROW(parse_int("2.5"), Error);
    EXPECT_THROW(parse_uint("-1"), Error);
}

TEST(key_value_text, parse_and_write) {
    auto doc = KeyValueText::parse(
        "# comment\n"
        "eta = 0.28\n"
        "\n"
        "  name = \"hello world\"  \n"
        "flag=true\n"
        "eta = 0.3\n");
    EXPECT_EQ(doc.get_double("eta"), 0.3);
    EXPECT_EQ(doc.get("name"), "hello world");
    EXPECT_TRUE(doc.get_bool("flag"));
    EXPECT_FALSE(doc.has("missing"));
    EXPECT_FALSE(doc.find("missing").has_value());
    EXPECT_EQ(doc.entries().size(), 3u);
    EXPECT_EQ(doc.entries()[0].first, "eta");

    auto again = KeyValueText::parse(doc.to_string());
    EXPECT_EQ(again.entries(), doc.entries());
}

TEST(key_value_text, errors) {
    EXPECT_THROW(KeyValueText::parse("no equals sign\n"), Error);
    EXPECT_THROW(KeyValueText::parse(" = 3\n"), Error);
    auto doc = KeyValueText::parse("a = x\n");
    EXPECT_THROW(doc.get("b"), Error);
    EXPECT_THROW(doc.get_double("a"), Error);
    EXPECT_THROW(doc.get_bool("a"), Error);
    try {
        KeyValueText::read_file("/nonexistent/dir/file.kv");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kIo);
    }
}

TEST(key_value_text, file_round_trip) {
    auto path = std::filesystem::temp_directory_path() / "trilink_kv_text_test.kv";
    KeyValueText doc;
    doc.set("seed", std::uint64_t{12345678901234ull});
    doc.set("z", 0.004);
    doc.set("dark", false);
    doc.write_file(path.string());
    auto back = KeyValueText::read_file(path.string());
    EXPECT_EQ(back.get_uint("seed"), 12345678901234ull);
    EXPECT_EQ(back.get_double("z"), 0.004);
    EXPECT_FALSE(back.get_bool("dark"));
    std::filesystem::remove(path);
}
