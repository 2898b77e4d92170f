#include "support.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace fptest;

TEST(Timestamps, RoundTrip) {
    const Timestamp t = parse_timestamp("2022-02-15T10:00:00Z");
    EXPECT_EQ(format_timestamp(t), "2022-02-15T10:00:00Z");
    EXPECT_EQ(t.time_since_epoch().count(), 1644919200);
    EXPECT_THROW(parse_timestamp("2022-02-15 10:00"), ParseError);
    EXPECT_THROW(parse_timestamp(""), ParseError);
}

TEST(Durations, HhmmAndParse) {
    EXPECT_EQ(format_hhmm(Seconds{7 * 3600 + 11 * 60}), "7:11");
    EXPECT_EQ(format_hhmm(Seconds{0}), "0:00");
    EXPECT_EQ(format_hhmm(Seconds{30 * 3600 + 5 * 60}), "30:05");
    EXPECT_EQ(format_hhmm(Seconds{59}), "0:01");
    EXPECT_EQ(parse_duration("168h"), Seconds{168 * 3600});
    EXPECT_EQ(parse_duration("90m"), Seconds{5400});
    EXPECT_EQ(parse_duration("600s"), Seconds{600});
    EXPECT_EQ(parse_duration("7d"), Seconds{7 * 86400});
    EXPECT_EQ(parse_duration("42"), Seconds{42});
    EXPECT_THROW(parse_duration("soon"), ParseError);
}

TEST(Hashing, KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
    EXPECT_EQ(base64_encode("fo"), "Zm8=");
    EXPECT_EQ(base64_decode("Zm8="), "fo");
}

TEST(Hashing, Base64RoundTripsArbitraryBytes) {
    Rng rng(3);
    for (int n = 0; n < 64; ++n) {
        std::string s;
        for (int i = 0; i < n; ++i) s += static_cast<char>(rng.below(256));
        EXPECT_EQ(base64_decode(base64_encode(s)), s);
    }
}

TEST(Strings, Helpers) {
    EXPECT_EQ(to_lower("AbC"), "abc");
    EXPECT_EQ(trim("  x y \n"), "x y");
    EXPECT_TRUE(icontains("Hello World", "WORLD"));
    EXPECT_TRUE(starts_with_icase("HTTPS://x", "https"));
    EXPECT_EQ(split("a,b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9"));
    EXPECT_FALSE(is_valid_utf8("\xff\xfe"));
}

TEST(Median, OddEvenRule) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_EQ(median({5}), 5.0);
}

TEST(RngTest, DeterministicAndBounded) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(c.below(13), 13u);
        const double u = c.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_EQ(mix_seed(9, 4), mix_seed(9, 4));
}

TEST(Clocks, ManualClockMovesOnlyForward) {
    ManualClock clock(parse_timestamp("2022-01-01T00:00:00Z"));
    clock.advance(Seconds{60});
    EXPECT_EQ(format_timestamp(clock.now()), "2022-01-01T00:01:00Z");
    clock.sleep_until(parse_timestamp("2022-01-01T00:00:30Z"));
    EXPECT_EQ(format_timestamp(clock.now()), "2022-01-01T00:01:00Z");
    clock.sleep_until(parse_timestamp("2022-01-01T01:00:00Z"));
    EXPECT_EQ(format_timestamp(clock.now()), "2022-01-01T01:00:00Z");
}

TEST(Files, WriteReadAndMissing) {
    const std::string dir = temp_dir("common");
    write_file(dir + "/a.txt", "hello\n");
    EXPECT_EQ(read_file(dir + "/a.txt"), "hello\n");
    EXPECT_THROW(read_file(dir + "/missing.txt"), IoError);
}

TEST(Errors, CodesAreStable) {
    EXPECT_EQ(ParseError("x").code(), "parse");
    EXPECT_EQ(IoError("x").code(), "io");
    EXPECT_EQ(PreconditionError("x").code(), "precondition");
}
