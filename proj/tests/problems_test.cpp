#include <doctest.h>

#include <cmath>

#include "skipsim/problems.hpp"

using namespace skipsim;

namespace {

Vector fd_gradient(const LocalObjective& f, const Vector& x, double h = 1e-6) {
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (f.value(xp) - f.value(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

Vector random_point(RngStream& s, std::size_t d, double scale = 2.0) {
    Vector x(d);
    for (double& e : x) e = scale * (2.0 * s.uniform() - 1.0);
    return x;
}

} // namespace

TEST_CASE("logistic gradient at zero, single positive sample") {
    // d/dx log(1+exp(-a'x)) at x=0 is -a/2.
    auto f = LocalObjective::logistic({{{1.0, 0.0}, 1.0}}, 1e-12);
    const auto g = f.gradient({0.0, 0.0});
    CHECK(g[0] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(0.0));
}

TEST_CASE("quadratic gradient vanishes at its own minimizer") {
    auto f = LocalObjective::quadratic(0.5, 4.0, {3.0, 4.0}, 0.7);
    LiftedObjective lifted({f});
    const auto min = reference_minimizer(lifted);
    CHECK(std::sqrt(norm_sq(f.gradient(min.x_star))) < 1e-10);
}

TEST_CASE("label symmetry cancels the logistic data gradient") {
    auto f = LocalObjective::logistic({{{1.0, 2.0}, 1.0}, {{1.0, 2.0}, -1.0}}, 0.1);
    const auto g = f.gradient({0.0, 0.0});
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[1] == doctest::Approx(0.0));
}

TEST_CASE("smoothness constants") {
    auto f1 = LocalObjective::logistic({{{1.0, 0.0}, 1.0}}, 0.1);
    CHECK(f1.smoothness_constant() == doctest::Approx(0.35).epsilon(1e-9));

    auto f2 = LocalObjective::quadratic(1.0, 3.0, {1.0}, 0.0);
    CHECK(f2.smoothness_constant() == 3.0);

    auto f3 = LocalObjective::logistic({{{0.0, 0.0}, 1.0}}, 0.5);
    CHECK(f3.smoothness_constant() == doctest::Approx(0.5));
}

TEST_CASE("bregman divergence") {
    auto quad = LocalObjective::quadratic(2.0, 2.0, {1.0, 0.0}, 0.0); // (2/2)||x||^2 form
    const Vector x = {1.5, -0.5}, y = {0.5, -0.5};
    SUBCASE("zero at identical points") { CHECK(quad.bregman(x, x) == doctest::Approx(0.0)); }
    SUBCASE("exact for quadratics: (a/2)||x-y||^2 with a=2") {
        CHECK(quad.bregman(x, y) == doctest::Approx(1.0));
    }
    SUBCASE("logistic value sits inside the (mu/2, L/2) band") {
        auto f = LocalObjective::logistic({{{0.8, -0.3}, 1.0}, {{-0.2, 1.1}, -1.0}}, 0.1);
        RngStream s(5, 0, "bregman");
        for (int trial = 0; trial < 100; ++trial) {
            const auto a = random_point(s, 2), b = random_point(s, 2);
            const double gap = norm_sq(sub(a, b));
            const double val = f.bregman(a, b);
            CHECK(val >= 0.5 * f.mu() * gap - 1e-12);
            CHECK(val <= 0.5 * f.smoothness_constant() * gap + 1e-12);
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    std::vector<LocalObjective> objectives;
    objectives.push_back(LocalObjective::quadratic(0.3, 5.0, {1.0, -2.0, 0.5}, 0.4));
    objectives.push_back(LocalObjective::logistic(
        {{{0.8, -0.3, 0.2}, 1.0}, {{-0.2, 1.1, 0.6}, -1.0}, {{0.1, 0.4, -0.9}, 1.0}}, 0.1));
    for (const auto& f : objectives) {
        RngStream s(11, 0, "fd");
        for (int trial = 0; trial < 20; ++trial) {
            const auto x = random_point(s, f.dim());
            const auto ga = f.gradient(x);
            const auto gn = fd_gradient(f, x);
            const double err = std::sqrt(norm_sq(sub(ga, gn)));
            const double ref = std::max(1.0, std::sqrt(norm_sq(ga)));
            CHECK(err / ref <= 1e-6);
        }
    }
}

TEST_CASE("gradient rejects dimension mismatch") {
    auto f = LocalObjective::quadratic(1.0, 2.0, {1.0, 0.0}, 0.0);
    CHECK_THROWS_AS(f.gradient({1.0}), std::invalid_argument);
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(LocalObjective::quadratic(2.0, 1.0, {1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(LocalObjective::logistic({{{1.0}, 0.5}}, 0.1), std::invalid_argument);
}

TEST_CASE("reference minimizer, quadratics") {
    auto f1 = LocalObjective::quadratic(1.0, 4.0, {1.0, 0.0}, 0.5);
    auto f2 = LocalObjective::quadratic(1.0, 2.0, {0.0, 1.0}, -0.25);
    LiftedObjective lifted({f1, f2});
    const auto min = reference_minimizer(lifted);
    Vector mean(2, 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto g = lifted.local(i).gradient(min.x_star);
        mean = add(mean, g);
        CHECK(min.h_star[i] == g);
    }
    CHECK(std::sqrt(norm_sq(scale(0.5, mean))) <= 1e-10);
}

TEST_CASE("reference minimizer, logistic instance") {
    std::vector<LocalObjective> locals;
    RngStream s(13, 0, "minimizer-data");
    for (int i = 0; i < 3; ++i) {
        std::vector<LogisticSample> samples;
        for (int j = 0; j < 8; ++j) {
            samples.push_back({random_point(s, 2, 1.0), s.flip(0.5) ? 1.0 : -1.0});
        }
        locals.push_back(LocalObjective::logistic(std::move(samples), 0.1));
    }
    LiftedObjective lifted(locals);
    const auto min = reference_minimizer(lifted);
    Vector mean(2, 0.0);
    for (std::size_t i = 0; i < 3; ++i) mean = add(mean, lifted.local(i).gradient(min.x_star));
    CHECK(std::sqrt(norm_sq(scale(1.0 / 3.0, mean))) <= 1e-10);
}

TEST_CASE("lifted objective structure") {
    auto f1 = LocalObjective::quadratic(1.0, 1.0, {1.0, 0.0}, 0.0);
    auto f2 = LocalObjective::quadratic(1.0, 3.0, {0.0, 1.0}, 0.5);

    SUBCASE("single client lift equals the local gradient") {
        LiftedObjective one({f1});
        const Vector x = {0.3, -0.7};
        CHECK(one.gradient(x) == f1.gradient(x));
    }
    SUBCASE("gradient concatenates blockwise") {
        LiftedObjective two({f1, f2});
        const Vector x1 = {0.3, -0.7}, x2 = {1.1, 0.2};
        const auto g = two.gradient(two.stack({x1, x2}));
        CHECK(two.block(g, 0) == f1.gradient(x1));
        CHECK(two.block(g, 1) == f2.gradient(x2));
    }
    SUBCASE("smoothness matrix repeats each block constant") {
        LiftedObjective two({f1, f2});
        CHECK(two.smoothness_matrix().diag == std::vector<double>{1, 1, 3, 3});
        CHECK(two.l_max() == 3.0);
        CHECK(two.condition_numbers() == std::vector<double>{1.0, 3.0});
    }
    SUBCASE("mismatched dimensions rejected") {
        auto g1 = LocalObjective::quadratic(1.0, 2.0, {1.0}, 0.0);
        CHECK_THROWS_AS(LiftedObjective({f1, g1}), std::invalid_argument);
    }
}
