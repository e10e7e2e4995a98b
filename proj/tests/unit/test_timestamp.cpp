#include <gtest/gtest.h>

#include "lineage/timestamp.hpp"

using namespace lineage;

TEST(Timestamp, ParsesHubForms) {
    const auto a = parse_timestamp("2024-09-18T08:30:00.000Z");
    ASSERT_TRUE(a);
    EXPECT_EQ(format_timestamp(*a), "2024-09-18T08:30:00Z");
    EXPECT_EQ(*parse_timestamp("2024-09-18 08:30:00"), *a);
    EXPECT_EQ(*parse_timestamp("2024-09-18T08:30Z"), *a);
    EXPECT_EQ(*parse_timestamp("2024-09-18T10:30:00.999+02:00"), *a);
    EXPECT_EQ(*parse_timestamp("2024-09-18T03:30:00-0500"), *a);
    EXPECT_EQ(format_timestamp(*parse_timestamp("2024-02-29")), "2024-02-29T00:00:00Z");
}

TEST(Timestamp, RejectsGarbage) {
    for (const char* bad : {"", "yesterday", "2024-13-01", "2024-02-30", "2024-01-01T25:00:00Z", "2024-01-01Tx",
                            "2024-01-01T10:00:00Zjunk", "20240101"}) {
        EXPECT_FALSE(parse_timestamp(bad)) << bad;
    }
    EXPECT_FALSE(parse_date("2024-01-01T00:00:00Z"));
}

TEST(Timestamp, PlatformFloor) {
    EXPECT_EQ(format_timestamp(platform_floor()), "2022-03-02T23:29:04Z");
}

TEST(Timestamp, YearMonth) {
    const auto ym = year_month_of(*parse_timestamp("2023-12-31T23:59:59Z"));
    EXPECT_EQ(ym.str(), "2023-12");
    EXPECT_EQ(ym.next().str(), "2024-01");
    EXPECT_LT(ym, ym.next());
    EXPECT_EQ(format_date(*parse_timestamp("2023-12-31T23:59:59Z")), "2023-12-31");
}
