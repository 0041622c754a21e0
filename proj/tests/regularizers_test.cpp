#include <doctest.h>

#include "skipsim/regularizers.hpp"

using namespace skipsim;

TEST_CASE("consensus prox averages blockwise, independent of step") {
    auto reg = Regularizer::consensus(2, 1);
    for (double step : {0.1, 1.0, 10.0}) {
        CHECK(reg.prox(step, {1.0, 3.0}) == Vector{2.0, 2.0});
    }
    auto reg2 = Regularizer::consensus(2, 2);
    CHECK(reg2.prox(1.0, {1.0, 0.0, 3.0, 2.0}) == Vector{2.0, 1.0, 2.0, 1.0});
    CHECK_THROWS_AS(reg2.prox(1.0, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("l1 prox soft-thresholds") {
    auto reg = Regularizer::l1(1.0);
    CHECK(reg.prox(1.0, {3.0}) == Vector{2.0});
    CHECK(reg.prox(1.0, {-3.0}) == Vector{-2.0});
    CHECK(reg.prox(1.0, {0.5}) == Vector{0.0});
    auto reg2 = Regularizer::l1(0.5);
    CHECK(reg2.prox(2.0, {3.0, -0.5}) == Vector{2.0, 0.0});
}

TEST_CASE("zero prox is the identity") {
    auto reg = Regularizer::zero();
    const Vector x = {1.5, -2.5, 0.0};
    CHECK(reg.prox(0.3, x) == x);
}

TEST_CASE("prox rejects nonpositive steps") {
    CHECK_THROWS_AS(Regularizer::zero().prox(0.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Regularizer::l1(-1.0), std::invalid_argument);
}

TEST_CASE("firm non-expansiveness on random pairs") {
    std::vector<Regularizer> regs = {Regularizer::consensus(2, 3), Regularizer::l1(0.7),
                                     Regularizer::zero()};
    RngStream s(21, 0, "prox-pairs");
    for (const auto& reg : regs) {
        for (int trial = 0; trial < 100; ++trial) {
            Vector v(6), w(6);
            for (double& e : v) e = 4.0 * s.uniform() - 2.0;
            for (double& e : w) e = 4.0 * s.uniform() - 2.0;
            const auto pv = reg.prox(1.0, v), pw = reg.prox(1.0, w);
            const auto dp = sub(pv, pw);
            CHECK(norm_sq(dp) <= dot(dp, sub(v, w)) + 1e-12);
        }
    }
}

TEST_CASE("consensus prox is an idempotent projection") {
    auto reg = Regularizer::consensus(3, 2);
    const Vector v = {1.0, 2.0, -1.0, 4.0, 3.0, 0.0};
    const auto once = reg.prox(1.0, v);
    CHECK(reg.prox(1.0, once) == once);
}
