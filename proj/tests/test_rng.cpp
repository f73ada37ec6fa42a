#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "emoxgen/rng.hpp"

using emoxgen::num::Rng;

TEST_CASE("identical seeds produce identical streams") {
    Rng a(0), b(0);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge within the first draws") {
    Rng a(0), b(1);
    bool differ = false;
    for (int i = 0; i < 10 && !differ; ++i) differ = a.next_u64() != b.next_u64();
    CHECK(differ);
}

TEST_CASE("stream values are pinned by the documented algorithm") {
    // Frozen reference draws; a change here is a protocol break, not a bug fix.
    Rng r(0);
    CHECK(r.next_u64() == 11091344671253066420ULL);
    CHECK(r.next_u64() == 13793997310169335082ULL);
    CHECK(r.next_u64() == 1900383378846508768ULL);
    CHECK(r.next_u64() == 7684712102626143532ULL);

    Rng u(0);
    CHECK(u.uniform() == 0.60126299941790484);
    CHECK(u.uniform() == 0.74777409254723981);
}

TEST_CASE("shuffle with seed 3 is reproducible byte-for-byte") {
    const std::vector<int> expected{7, 8, 4, 5, 6, 3, 1, 10, 2, 9};
    for (int run = 0; run < 2; ++run) {
        std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        Rng r(3);
        r.shuffle(v);
        CHECK(v == expected);
    }
}

TEST_CASE("uniform stays in [0,1) and bounded stays in range") {
    Rng r(42);
    for (int i = 0; i < 10000; ++i) {
        const double x = r.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(r.bounded(7) < 7);
    }
}

TEST_CASE("normal approximation is roughly standard") {
    Rng r(4);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("derived streams are independent of each other") {
    Rng a = Rng::derived(0, 0);
    Rng b = Rng::derived(0, 1);
    CHECK(a.next_u64() != b.next_u64());
    Rng a2 = Rng::derived(0, 0);
    CHECK(Rng::derived(0, 0).next_u64() == a2.next_u64());
}
