#include "generators.hpp"

#include "hybridfp/problem.hpp"

#include <doctest.h>

using namespace hybridfp;

TEST_CASE("cyclic operator index") {
    CHECK(cyclic_operator_index(1, 3) == 1);
    CHECK(cyclic_operator_index(3, 3) == 3);
    CHECK(cyclic_operator_index(4, 3) == 1);
    CHECK_THROWS_AS(cyclic_operator_index(1, 0), DegenerateFamily);
    CHECK_THROWS_AS(cyclic_operator_index(0, 2), std::invalid_argument);
}

TEST_CASE("cyclic index is periodic and onto") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_ops = 1 + static_cast<int>(rng() % 9);
        const long start = 1 + static_cast<long>(rng() % 1000);
        std::vector<int> seen(n_ops + 1, 0);
        for (long n = start; n < start + n_ops; ++n) {
            const int k = cyclic_operator_index(n, n_ops);
            REQUIRE(k >= 1);
            REQUIRE(k <= n_ops);
            seen[k]++;
            CHECK(cyclic_operator_index(n + n_ops, n_ops) == k);
        }
        for (int k = 1; k <= n_ops; ++k) CHECK(seen[k] == 1);
    }
}

TEST_CASE("truncated shift on l2 drops the last coordinate") {
    const auto inst = example_problem(2.0, 3);
    const Point x(inst.space, {0.3, -0.4, 0.5});
    const Point tx = inverse_duality_map(inst.maps.limit_family.front()(x));
    CHECK(tx[0] == 0.0);
    CHECK(tx[1] == doctest::Approx(0.3));
    CHECK(tx[2] == doctest::Approx(-0.4));
    CHECK(lyapunov(Point::zero(inst.space), tx) == doctest::Approx(0.09 + 0.16));
}

TEST_CASE("origin solves the example in every space") {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const auto inst = example_problem(p, 4);
        const Point zero = Point::zero(inst.space);
        CHECK(inst.maps.limit_family.front()(zero).coords().isZero());
        CHECK(inst.operators.front().evaluate(zero).coords().isZero());
        const auto rep = verify_problem(inst, 300, 4);
        CHECK(rep.all_passed());
        for (const char* name : {"maps_solution_j_fixed_point", "solution_vi_residual", "solution_ep_residual"}) {
            REQUIRE(rep.find(name) != nullptr);
            CHECK(rep.find(name)->worst_slack <= 1e-10);
        }
    }
}

TEST_CASE("example verification with 1000 samples passes") {
    const auto rep = verify_problem(example_problem(2.0, 4), 1000, 0);
    CHECK(rep.all_passed());
    CHECK(rep.find("bifunction_A2[inverse_duality]") != nullptr);
}

TEST_CASE("wrong-sign bifunction fails monotonicity with the squared-distance slack") {
    auto inst = example_problem(2.0, 4);
    inst.bifunctions = {inverse_duality_bifunction(inst.space, 1.0, -1.0)};
    const auto rep = verify_problem(inst, 200, 3);
    const PropertyCheck* a2 = rep.find("bifunction_A2[inverse_duality_reversed]");
    REQUIRE(a2 != nullptr);
    CHECK_FALSE(a2->passed);
    CHECK(a2->worst_slack > 0.0);

    // f(w,w') + f(w',w) = |w - w'|^2 in Hilbert space.
    const Point x(inst.space, {0.1, 0.2, 0.0, -0.3}), y(inst.space, {-0.2, 0.0, 0.1, 0.1});
    const DualPoint w = duality_map(x), w2 = duality_map(y);
    const double sum = inst.bifunctions[0].evaluate(w, w2) + inst.bifunctions[0].evaluate(w2, w);
    CHECK(sum == doctest::Approx((x.coords() - y.coords()).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("empty families leave only map checks") {
    auto inst = example_problem(3.0, 3);
    inst.operators.clear();
    inst.bifunctions.clear();
    const auto rep = verify_problem(inst, 50, 1);
    for (const auto& c : rep.checks) CHECK(c.name.rfind("maps_", 0) == 0);
    CHECK(rep.all_passed());
}

TEST_CASE("verification is deterministic") {
    const auto inst = example_problem(3.0, 5);
    const auto a = verify_problem(inst, 100, 42), b = verify_problem(inst, 100, 42);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].worst_slack == b.checks[i].worst_slack);
}

TEST_CASE("nst proxy bound holds on samples") {
    const auto inst = example_problem(3.0, 6);
    std::mt19937_64 rng(6);
    for (int n = 1; n <= 100; ++n) {
        const Point x = gen::in_ball(inst.space, 1.0, rng);
        const DualPoint jx = duality_map(x);
        const double tn = dual_norm(jx - inst.maps.member(n, x));
        const double t = dual_norm(jx - inst.maps.limit_family.front()(x));
        CHECK(tn >= (1.0 - 1.0 / (n + 2.0)) * t - 1e-12);
        CHECK(tn >= 0.5 * t - 1e-12);
    }
}

TEST_CASE("affine operator resolvent and validation") {
    const auto sp = SpaceDescriptor::hilbert(2);
    const auto a = affine_operator(sp, Matrix::Identity(2, 2), Vector::Zero(2));
    const Point z = a.closed_form_resolvent(Point(sp, {2.0, 0.0}), 1.0);
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(0.0));
    const auto zero_op = affine_operator(sp, Matrix::Zero(2, 2), Vector::Zero(2));
    CHECK(zero_op.closed_form_resolvent(Point(sp, {0.3, 0.4}), 5.0).coords() == Point(sp, {0.3, 0.4}).coords());
    CHECK(a.closed_form_resolvent(Point::zero(sp), 2.0).coords().isZero());
    Matrix bad = Matrix::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(affine_operator(sp, bad, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("example rejects invalid construction") {
    CHECK_THROWS(example_problem(1.0, 4));
    CHECK_THROWS(example_problem(2.0, 1));
    CHECK_THROWS(example_problem(2.0, 4, [](int) { return 0.7; }));
    CHECK_NOTHROW(example_problem(2.0, 4, [](int) { return 0.5; }));
}

TEST_CASE("seeded affine vi builtin is reproducible and monotone") {
    const auto a = hilbert_affine_vi_problem(5, 9), b = hilbert_affine_vi_problem(5, 9);
    const Point x(a.space, {1, 2, 3, 4, 5});
    CHECK(a.operators[0].evaluate(x).coords() == b.operators[0].evaluate(x).coords());
    CHECK(verify_problem(a, 200, 0).all_passed());
    const auto lp2 = hilbert_affine_vi_problem(5, 9, true);
    CHECK(lp2.space.geometry() == Geometry::Lp);
    CHECK(lp2.operators[0].evaluate(Point(lp2.space, x.coords())).coords() == a.operators[0].evaluate(x).coords());
}
