#include <gtest/gtest.h>

#include <set>

#include "ipcn/philox.hpp"

using ipcn::Philox4x32;

TEST(Philox, KnownAnswers) {
    using C = Philox4x32::counter_type;
    using K = Philox4x32::key_type;
    EXPECT_EQ(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, CompileTimeEvaluable) {
    constexpr auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    static_assert(out[0] == 0x6627e8d5);
}

TEST(ReplicateStream, DeterministicAndDistinct) {
    const ipcn::ReplicateStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    for (std::uint64_t t = 1; t < 50; ++t)
        for (std::uint32_t i = 0; i < 4; ++i) {
            const double u = a.uniform(t, i);
            EXPECT_EQ(u, b.uniform(t, i));
            EXPECT_NE(u, c.uniform(t, i));
            EXPECT_NE(u, d.uniform(t, i));
            EXPECT_GE(u, 0.0);
            EXPECT_LT(u, 1.0);
        }
}

TEST(ReplicateStream, RoughlyUniform) {
    const ipcn::ReplicateStream s(9, 0);
    int below = 0;
    double sum = 0.0;
    const int n = 200000;
    for (int t = 0; t < n; ++t) {
        const double u = s.uniform(static_cast<std::uint64_t>(t), 0);
        sum += u;
        below += u < 0.25;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(static_cast<double>(below) / n, 0.25, 0.005);
}

TEST(PhiloxEngine, UniformIntCoversRangeOnly) {
    ipcn::PhiloxEngine eng(5);
    std::set<std::int64_t> seen;
    for (int k = 0; k < 5000; ++k) {
        const auto v = eng.uniform_int(-3, 4);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 4);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 8u);
    EXPECT_EQ(eng.uniform_int(7, 7), 7);
}

TEST(PhiloxEngine, ReproducibleBySeedAndStream) {
    ipcn::PhiloxEngine a(1, 0), b(1, 0), c(1, 1);
    bool differs = false;
    for (int k = 0; k < 100; ++k) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differs |= x != c();
    }
    EXPECT_TRUE(differs);
}
