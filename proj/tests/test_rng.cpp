#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "ifpca/rng.hpp"

using namespace ifpca;

TEST_SUITE("rng") {

TEST_CASE("derive_seed separates nearby bases and salts") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 50; ++base)
        for (std::uint64_t a = 0; a < 50; ++a)
            for (std::uint64_t b = 0; b < 3; ++b) seen.insert(derive_seed(base, a, b));
    CHECK(seen.size() == 50u * 50u * 3u);
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("streams with the same seed are identical, different seeds are not") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform(), vb = b.uniform(), vc = c.uniform();
        all_equal = all_equal && va == vb;
        any_equal_c = any_equal_c || va == vc;
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("uniform stays in [0,1) and uniform_pos in (0,1)") {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("normal draws have roughly standard moments") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);        // SE ~ 1/sqrt(n) = 0.0022
    CHECK(std::fabs(var - 1.0) < 0.02);   // SE ~ sqrt(2/n) = 0.0032
}

TEST_CASE("uniform_int covers the whole inclusive range") {
    Rng rng(3);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t v = rng.uniform_int(-2, 5);
        CHECK(v >= -2);
        CHECK(v <= 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 8);
    CHECK(rng.uniform_int(4, 4) == 4);
}

TEST_CASE("sign is +/-1 and roughly balanced") {
    Rng rng(9);
    int pos = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const int s = rng.sign();
        CHECK((s == 1 || s == -1));
        if (s == 1) ++pos;
    }
    CHECK(pos > n / 2 - 250);  // 5 sigma
    CHECK(pos < n / 2 + 250);
}

}  // TEST_SUITE
