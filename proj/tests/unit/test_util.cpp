#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "humbench/error.hpp"
#include "humbench/resources.hpp"
#include "humbench/rng.hpp"
#include "humbench/sha256.hpp"
#include "humbench/text.hpp"

using namespace humbench;

TEST(Sha256, KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, SameSeedSameSequence) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, Mt19937_64ReferenceValue) {
    // The standard fixes the 10000th output of a default-seeded engine.
    Rng r(5489u);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = r.next();
    EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(Rng, DerivedStreamsDiffer) {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t s = 0; s < 64; ++s) firsts.insert(Rng::derive(1, s).next());
    EXPECT_EQ(firsts.size(), 64u);
    EXPECT_EQ(Rng::derive(3, 4).next(), Rng::derive(3, 4).next());
    EXPECT_NE(Rng::derive(3, 4).next(), Rng::derive(4, 3).next());
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
    Rng r(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = r.below(7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    for (int h : hits) EXPECT_GT(h, 800);
    EXPECT_THROW(r.below(0), ValidationError);
}

TEST(Rng, Uniform01InUnitInterval) {
    Rng r(2);
    double sum = 0;
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}

TEST(Rng, SampleIndicesAreDistinctAndBounded) {
    Rng r(3);
    for (std::size_t k = 0; k <= 10; ++k) {
        auto idx = r.sample_indices(10, k);
        EXPECT_EQ(idx.size(), k);
        std::set<std::size_t> uniq(idx.begin(), idx.end());
        EXPECT_EQ(uniq.size(), k);
        for (auto i : idx) EXPECT_LT(i, 10u);
    }
    EXPECT_EQ(r.sample_indices(3, 10).size(), 3u);
}

TEST(Rng, ShuffleIsAPermutation) {
    Rng r(4);
    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    r.shuffle(std::span<int>(w));
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(Text, TrimLowerSplitJoin) {
    EXPECT_EQ(text::trim("  a b \n"), "a b");
    EXPECT_EQ(text::to_lower("AbC"), "abc");
    EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
    EXPECT_EQ(text::join({"a", "b", "c"}, "; "), "a; b; c");
}

TEST(Text, FoldQuotes) {
    EXPECT_EQ(text::fold_quotes("don’t “x”"), "don't \"x\"");
}

TEST(Text, Counting) {
    EXPECT_EQ(text::count_words("  one two\tthree\n"), 3u);
    EXPECT_EQ(text::count_words(""), 0u);
    EXPECT_EQ(text::count_sentences("One. Two! Three?\nFour"), 4u);
    EXPECT_EQ(text::count_sentences("... !!"), 0u);
}

TEST(Text, CaseInsensitiveSearch) {
    EXPECT_TRUE(text::contains_ci("Hello World", "WORLD"));
    EXPECT_EQ(text::rfind_ci("Yes no YES", "yes"), 7u);
    EXPECT_EQ(text::rfind_ci("abc", "x"), std::string::npos);
}

TEST(Resources, TemplatesAndCodebookAreEmbedded) {
    EXPECT_TRUE(resources::has("codebook/default.yaml"));
    EXPECT_TRUE(resources::has("templates/user.txt"));
    EXPECT_FALSE(resources::has("templates/nope.txt"));
    EXPECT_GE(resources::list().size(), 20u);
}
