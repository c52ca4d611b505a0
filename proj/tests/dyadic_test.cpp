#include <gtest/gtest.h>

#include "upsilon/dyadic.hpp"
#include "upsilon/rng.hpp"

using namespace upsilon;

TEST(Dyadic, NormalizesToOddNumerator) {
    Dyadic d(BigInt(4), 3);  // 4/8 = 1/2
    EXPECT_EQ(d.numerator(), 1);
    EXPECT_EQ(d.exponent(), 1u);
    EXPECT_EQ(d, Dyadic(BigInt(1), 1));
}

TEST(Dyadic, ZeroNormalizesToExponentZero) {
    Dyadic d(BigInt(0), 17);
    EXPECT_TRUE(d.is_zero());
    EXPECT_EQ(d.exponent(), 0u);
    EXPECT_EQ(d.to_string(), "0");
}

TEST(Dyadic, ExactAdditionIsOrderIndependent) {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Dyadic> parts;
        for (int i = 0; i < 20; ++i)
            parts.emplace_back(BigInt(rng.below(1000)), static_cast<unsigned>(rng.below(40)));
        Dyadic forward, backward;
        for (const auto& p : parts) forward += p;
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) backward += *it;
        EXPECT_EQ(forward, backward);
    }
}

TEST(Dyadic, GeometricSumHasClosedForm) {
    // sum_{k=1..40} 2^-k = 1 - 2^-40
    Dyadic sum;
    for (unsigned k = 1; k <= 40; ++k) sum += Dyadic::pow2(k);
    EXPECT_EQ(sum, Dyadic::one() - Dyadic::pow2(40));
}

TEST(Dyadic, ComparisonAcrossExponents) {
    EXPECT_LT(Dyadic::pow2(3), Dyadic::pow2(2));
    EXPECT_GT(Dyadic(BigInt(3), 2), Dyadic(BigInt(1), 1));  // 3/4 > 1/2
    EXPECT_LE(Dyadic::zero(), Dyadic::zero());
}

TEST(Dyadic, UnitIntervalCheck) {
    EXPECT_TRUE(Dyadic::one().in_unit_interval());
    EXPECT_TRUE(Dyadic::zero().in_unit_interval());
    EXPECT_TRUE(Dyadic(BigInt(255), 8).in_unit_interval());
    EXPECT_FALSE(Dyadic(BigInt(257), 8).in_unit_interval());
    EXPECT_FALSE((Dyadic::zero() - Dyadic::one()).in_unit_interval());
}

TEST(Dyadic, ByteQuantization) {
    EXPECT_EQ(Dyadic(BigInt(1), 1).to_byte_256(), 0x80);  // 1/2 -> 128
    EXPECT_EQ(Dyadic::one().to_byte_256(), 255);          // clamped
    EXPECT_EQ(Dyadic::zero().to_byte_256(), 0);
    EXPECT_EQ(Dyadic(BigInt(1), 9).to_byte_256(), 0);  // 1/512 floors to 0
    EXPECT_EQ(Dyadic(BigInt(3), 9).to_byte_256(), 1);  // 3/512 floors to 1/256
}

TEST(Dyadic, FloorToGridRoundsDown) {
    // 1/3 on the /2^4 grid is 5/16
    EXPECT_EQ(Dyadic::floor_to_grid(Rat(1, 3), 4), Dyadic(BigInt(5), 4));
    EXPECT_EQ(Dyadic::floor_to_grid(Rat(1, 2), 4), Dyadic(BigInt(1), 1));  // exact stays exact
}

TEST(Dyadic, FormatsAsPowerOfTwoFraction) {
    EXPECT_EQ(Dyadic(BigInt(3), 5).to_string(), "3/2^5");
    EXPECT_EQ(Dyadic::one().to_string(), "1");
}

TEST(Rational, ParseForms) {
    EXPECT_EQ(parse_rational("1/2"), Rat(1, 2));
    EXPECT_EQ(parse_rational("0.95"), Rat(19, 20));
    EXPECT_EQ(parse_rational("3"), Rat(3));
    EXPECT_EQ(parse_rational("0.125"), Rat(1, 8));
    EXPECT_THROW(parse_rational("x"), std::invalid_argument);
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
    EXPECT_EQ(format_rational(Rat(19, 20)), "19/20");
    EXPECT_EQ(format_rational(Rat(4, 2)), "2");
}

TEST(Rng, DeterministicStreams) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    const std::uint64_t s1 = derive_seed(1, {2, 3});
    const std::uint64_t s2 = derive_seed(1, {2, 3});
    const std::uint64_t s3 = derive_seed(1, {3, 2});
    EXPECT_EQ(s1, s2);
    EXPECT_NE(s1, s3);
}

TEST(Rng, BoundedDrawsStayInRange) {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.below(7), 7u);
    for (int i = 0; i < 1000; ++i) {
        const BigInt bound = BigInt("123456789012345678901234567890");
        EXPECT_LT(rng.below_big(bound), bound);
    }
}
