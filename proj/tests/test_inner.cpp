#include "generators.hpp"

#include "hybridfp/inner_solvers.hpp"

#include <doctest.h>

using namespace hybridfp;

namespace {

Bifunction zero_bifunction(const SpaceDescriptor& sp) {
    Bifunction f;
    f.name = "zero";
    f.evaluate = [](const DualPoint&, const DualPoint&) { return 0.0; };
    f.operator_form = [sp](const DualPoint&) { return Point::zero(sp); };
    return f;
}

Bifunction hilbert_identity_bifunction(const SpaceDescriptor& sp) {
    Bifunction f;
    f.name = "identity_form";
    f.evaluate = [sp](const DualPoint& w, const DualPoint& w2) { return pair(Point(sp, w.coords()), w2 - w); };
    f.operator_form = [sp](const DualPoint& w) { return Point(sp, w.coords()); };
    return f;
}

std::vector<HalfSpace> random_cuts(const SpaceDescriptor& sp, int count, std::mt19937_64& rng) {
    // Cuts from iterate pairs with |y| <= |x|, so the origin stays feasible.
    std::vector<HalfSpace> out;
    for (int k = 0; k < count; ++k) {
        const Point x = gen::in_ball(sp, 1.0, rng);
        const Point y = x * gen::uniform(0.2, 0.9, rng) + gen::in_ball(sp, 0.05, rng);
        if (norm(y) > norm(x)) continue;
        out.push_back(halfspace_from_iterates(x, y, k));
    }
    return out;
}

}  // namespace

TEST_CASE("eq resolvent examples") {
    const auto sp = SpaceDescriptor::hilbert(2);
    const FeasibleSet ball = FeasibleSet::ball(Point::zero(sp), 1.0);
    SolverSettings s;
    const auto z = eq_resolvent(hilbert_identity_bifunction(sp), 1.0, Point(sp, {0.5, 0.0}), ball, s);
    CHECK(z.point[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(std::abs(z.point[1]) <= 1e-7);
    CHECK(z.certificate.passed);

    const auto lp = SpaceDescriptor::lp(3, 3.0);
    const auto inst = example_problem(3.0, 3);
    const auto z0 = eq_resolvent(inst.bifunctions[0], 2.0, Point::zero(lp), inst.feasible_set, s);
    CHECK(z0.point.coords().isZero());

    const Point inside(sp, {0.3, -0.2});
    const auto zz = eq_resolvent(zero_bifunction(sp), 1.5, inside, ball, s);
    CHECK((zz.point.coords() - inside.coords()).norm() <= 1e-7);
}

TEST_CASE("vi resolvent examples") {
    SolverSettings s;
    const auto inst = example_problem(3.0, 4);
    const Point x(inst.space, {0.4, -0.3, 0.2, 0.1});
    const auto u = vi_resolvent(inst.operators[0], 1.0, x, inst.feasible_set, s);
    CHECK((u.point.coords() - x.coords() / 2.0).norm() <= 1e-12);
    CHECK(u.closed_form);
    CHECK(vi_resolvent(inst.operators[0], 3.0, Point::zero(inst.space), inst.feasible_set, s).point.coords().isZero());

    const auto sp = SpaceDescriptor::hilbert(2);
    const auto a = affine_operator(sp, Matrix::Identity(2, 2), Vector::Zero(2));
    const auto v = vi_resolvent(a, 1.0, Point(sp, {2.0, 0.0}), FeasibleSet::ball(Point::zero(sp), 10.0), s);
    CHECK(v.point[0] == doctest::Approx(1.0));
    CHECK(v.point[1] == doctest::Approx(0.0));
}

TEST_CASE("iterative paths agree with closed forms") {
    SolverSettings s;
    std::mt19937_64 rng(13);
    for (double p : {2.0, 3.0, 1.5}) {
        const auto inst = example_problem(p, 4);
        for (int k = 0; k < 10; ++k) {
            const Point x = gen::in_ball(inst.space, 1.0, rng);
            const double r = gen::uniform(1.0, 10.0, rng);
            const Point expected = x * (1.0 / (1.0 + r));
            const auto vi = vi_resolvent_iterative(inst.operators[0], r, x, inst.feasible_set, s);
            CHECK((vi.point.coords() - expected.coords()).cwiseAbs().maxCoeff() <= 1e-6);
            const auto ep = eq_resolvent_iterative(inst.bifunctions[0], r, x, inst.feasible_set, s);
            CHECK((ep.point.coords() - expected.coords()).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
    const auto aff = hilbert_affine_vi_problem(4, 2);
    for (int k = 0; k < 10; ++k) {
        const Point x = gen::in_ball(aff.space, 8.0, rng);
        const double r = gen::uniform(1.0, 10.0, rng);
        const auto closed = vi_resolvent(aff.operators[0], r, x, aff.feasible_set, s);
        const auto iter = vi_resolvent_iterative(aff.operators[0], r, x, aff.feasible_set, s);
        CHECK(closed.closed_form);
        CHECK((closed.point.coords() - iter.point.coords()).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("vi resolvent on the boundary needs the iterative path") {
    const auto sp = SpaceDescriptor::hilbert(2);
    const auto a = affine_operator(sp, Matrix::Zero(2, 2), (Vector(2) << -1.0, 0.0).finished());
    const FeasibleSet ball = FeasibleSet::ball(Point::zero(sp), 1.0);
    // z + r e1 leaves the ball; the answer is the projection onto it.
    const auto u = vi_resolvent(a, 2.0, Point(sp, {0.5, 0.0}), ball, SolverSettings{});
    CHECK_FALSE(u.closed_form);
    CHECK(u.point[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(u.certificate.passed);
}

TEST_CASE("retraction examples") {
    SolverSettings s;
    const auto sp = SpaceDescriptor::hilbert(2);
    const FeasibleSet big = FeasibleSet::ball(Point::zero(sp), 1e6);
    const HalfSpace left{DualPoint(sp, {0.5, 0.0}), 0.0, 0};
    const auto r = sunny_retraction(Point(sp, {2.0, 3.0}), big, {left}, s);
    CHECK(std::abs(r.point[0]) <= 1e-9);
    CHECK(r.point[1] == doctest::Approx(3.0));

    const auto lp = SpaceDescriptor::lp(3, 3.0);
    const FeasibleSet unit = FeasibleSet::ball(Point::zero(lp), 1.0);
    const Point x(lp, {1.2, -1.0, 0.7});
    const Point x2 = x * (2.0 / norm(x));
    const auto rr = sunny_retraction(x2, unit, {}, s);
    CHECK((rr.point.coords() - x2.coords() / 2.0).cwiseAbs().maxCoeff() <= 1e-10);

    // Dense boundary oracle for <x - Rx, Jy - JRx> <= 0.
    std::mt19937_64 rng(1);
    double worst = -1.0;
    for (int k = 0; k < 20000; ++k) {
        Point y = gen::in_ball(lp, 1.0, rng);
        y = y * (1.0 / norm(y));
        worst = std::max(worst, pair(x2 - rr.point, duality_map(y) - duality_map(rr.point)));
    }
    CHECK(worst <= 1e-10);

    const Point in(lp, {0.1, 0.2, 0.3});
    CHECK(sunny_retraction(in, unit, {}, s).point.coords() == in.coords());
}

TEST_CASE("half-space from iterates") {
    const auto sp = SpaceDescriptor::hilbert(2);
    const HalfSpace same = halfspace_from_iterates(Point(sp, {0.3, 0.1}), Point(sp, {0.3, 0.1}));
    CHECK(same.normal.coords().isZero());
    CHECK(same.offset == 0.0);
    const HalfSpace h = halfspace_from_iterates(Point(sp, {1.0, 0.0}), Point::zero(sp));
    CHECK(h.normal[0] == 1.0);
    CHECK(h.normal[1] == 0.0);
    CHECK(h.offset == 1.0);

    std::mt19937_64 rng(19);
    const auto lp = SpaceDescriptor::lp(4, 3.0);
    for (int k = 0; k < 500; ++k) {
        const Point z = gen::point(lp, rng), x = gen::point(lp, rng), y = gen::point(lp, rng);
        const HalfSpace c = halfspace_from_iterates(x, y);
        const double lhs = c.offset - 2.0 * pair(z, c.normal);
        const double rhs = lyapunov(z, x) - lyapunov(z, y);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lyapunov(z, x)) + std::abs(lyapunov(z, y))));
    }
}

TEST_CASE("composite inequalities against the known solution") {
    SolverSettings s;
    std::mt19937_64 rng(23);
    for (double p : {1.5, 2.0, 3.0}) {
        const auto inst = example_problem(p, 5);
        const Point sol = inst.known_common_solutions.front();
        for (int k = 0; k < 30; ++k) {
            const Point x = gen::in_ball(inst.space, 1.0, rng);
            const double r = gen::uniform(1.0, 10.0, rng);
            const Point z = eq_resolvent(inst.bifunctions[0], r, x, inst.feasible_set, s).point;
            CHECK(lyapunov(sol, z) + lyapunov(z, x) <= lyapunov(sol, x) + 1e-6);
            const Point u = vi_resolvent(inst.operators[0], r, x, inst.feasible_set, s).point;
            CHECK(lyapunov(sol, u) + lyapunov(u, x) <= lyapunov(sol, x) + 1e-6);
        }
    }
}

TEST_CASE("firm-type inequality for both resolvents") {
    SolverSettings s;
    std::mt19937_64 rng(29);
    for (double p : {2.0, 3.0, 4.0}) {
        const auto inst = example_problem(p, 4);
        for (int k = 0; k < 30; ++k) {
            const Point x = gen::in_ball(inst.space, 1.0, rng), y = gen::in_ball(inst.space, 1.0, rng);
            const double r = gen::uniform(1.0, 10.0, rng);
            for (int which = 0; which < 2; ++which) {
                auto solve = [&](const Point& v) {
                    return which == 0 ? eq_resolvent(inst.bifunctions[0], r, v, inst.feasible_set, s).point
                                      : vi_resolvent(inst.operators[0], r, v, inst.feasible_set, s).point;
                };
                const Point tx = solve(x), ty = solve(y);
                const DualPoint dj = duality_map(tx) - duality_map(ty);
                CHECK(pair(tx - ty, dj) <= pair(x - y, dj) + 1e-6);
            }
        }
    }
}

TEST_CASE("points between Rx and its reflection are not all sent to Rx") {
    const auto sp = SpaceDescriptor::hilbert(2);
    const FeasibleSet unit = FeasibleSet::ball(Point::zero(sp), 1.0);
    const Point x(sp, {2.0, 0.0});
    const Point rx = sunny_retraction(x, unit, {}, SolverSettings{}).point;
    CHECK(rx[0] == doctest::Approx(1.0));
    const Point inward = rx + (x - rx) * -1.0;
    CHECK(sunny_retraction(inward, unit, {}, SolverSettings{}).point.coords().isZero());
}

TEST_CASE("retraction properties on convex-image regions") {
    SolverSettings s;
    std::mt19937_64 rng(31);
    struct Case {
        SpaceDescriptor sp;
        bool cuts;
    };
    const std::vector<Case> cases{{SpaceDescriptor::hilbert(3), true},
                                  {SpaceDescriptor::lp(3, 2.0), true},
                                  {SpaceDescriptor::lp(3, 3.0), false},
                                  {SpaceDescriptor::lp(3, 1.5), false}};
    for (const auto& c : cases) {
        const FeasibleSet base = FeasibleSet::ball(Point::zero(c.sp), 1.0);
        for (int k = 0; k < 15; ++k) {
            const auto ledger = c.cuts ? random_cuts(c.sp, 3, rng) : std::vector<HalfSpace>{};
            const FeasibleSet region = base.intersect(ledger);
            const Point x = gen::in_ball(c.sp, 3.0, rng);
            const Point rx = sunny_retraction(x, base, ledger, s).point;
            CHECK(region.contains(rx, 1e-9));
            const Point again = sunny_retraction(rx, base, ledger, s).point;
            CHECK((again.coords() - rx.coords()).cwiseAbs().maxCoeff() <= 1e-8);
            for (double t : {-1.0, -0.5, -0.1}) {
                const Point moved = rx + (x - rx) * (-t);
                const Point rm = sunny_retraction(moved, base, ledger, s).point;
                CHECK((rm.coords() - rx.coords()).cwiseAbs().maxCoeff() <= 1e-6);
            }
            std::mt19937_64 srng(k);
            for (const auto& y : region.sample(Point::zero(c.sp), 16, srng))
                CHECK(lyapunov(x, rx) + lyapunov(rx, y) <= lyapunov(x, y) + 1e-6);
        }
    }
}

TEST_CASE("retraction paths agree in l2") {
    SolverSettings s;
    s.inner_tol = 1e-13;
    s.max_inner_iters = 200000;
    std::mt19937_64 rng(37);
    const auto sp = SpaceDescriptor::lp(4, 2.0);
    const FeasibleSet base = FeasibleSet::ball(Point::zero(sp), 1.0);
    for (int k = 0; k < 20; ++k) {
        const auto ledger = random_cuts(sp, 4, rng);
        const Point x = gen::in_ball(sp, 3.0, rng);
        const Point a = sunny_retraction(x, base, ledger, s, {}, RetractionPath::Auto).point;
        const Point d = sunny_retraction(x, base, ledger, s, {}, RetractionPath::Dykstra).point;
        const Point n = sunny_retraction(x, base, ledger, s, {}, RetractionPath::DualNewton).point;
        CHECK((a.coords() - d.coords()).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((a.coords() - n.coords()).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("certificates are deterministic in the seed") {
    SolverSettings s;
    s.rng_seed = 99;
    const auto sp = SpaceDescriptor::hilbert(3);
    std::mt19937_64 rng(41);
    const auto ledger = random_cuts(sp, 3, rng);
    const Point x(sp, {2.0, -1.0, 0.5});
    const auto a = sunny_retraction(x, FeasibleSet::ball(Point::zero(sp), 1.0), ledger, s);
    const auto b = sunny_retraction(x, FeasibleSet::ball(Point::zero(sp), 1.0), ledger, s);
    CHECK(a.certificate.worst_violation == b.certificate.worst_violation);
    CHECK(a.point.coords() == b.point.coords());
    CHECK(a.certificate.passed == (a.certificate.worst_violation <= a.certificate.tolerance));
}

TEST_CASE("failures are reported") {
    const auto sp = SpaceDescriptor::hilbert(2);
    SolverSettings s;
    s.max_ledger = 1;
    const HalfSpace h{DualPoint(sp, {1.0, 0.0}), 1.0, 0};
    CHECK_THROWS_AS(sunny_retraction(Point(sp, {3.0, 0.0}), FeasibleSet::ball(Point::zero(sp), 5.0), {h, h}, s),
                    LedgerCapExceeded);

    SolverSettings tight;
    tight.max_inner_iters = 1;
    tight.certificate_tol = 1e-12;
    const auto a = affine_operator(sp, (Matrix(2, 2) << 1.0, 2.0, -2.0, 1.0).finished(), Vector::Zero(2));
    CHECK_THROWS_AS(vi_resolvent_iterative(a, 5.0, Point(sp, {0.9, 0.1}), FeasibleSet::ball(Point::zero(sp), 1.0), tight),
                    NonconvergedInnerSolve);

    const HalfSpace far{DualPoint(sp, {-1.0, 0.0}), -20.0, 0};
    CHECK_THROWS_AS(sunny_retraction(Point::zero(sp), FeasibleSet::ball(Point::zero(sp), 1.0), {far}, SolverSettings{}),
                    InfeasibleRegion);

    SolverSettings bad;
    bad.certificate_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("nonconvex l_p retraction reaches the grid minimum") {
    const auto sp = SpaceDescriptor::lp(2, 1.5);
    const double cuts[3][3] = {{0.38145588427184041, -0.33721732005001892, 0.40857509102217227},
                               {0.19967910032009148, -0.12419510108751872, 0.15981471419026869},
                               {-0.256848822232566, 0.53234943511176924, 0.68975366080036293}};
    std::vector<HalfSpace> ledger;
    for (const auto& c : cuts) ledger.push_back({DualPoint(sp, {c[0], c[1]}), c[2], 1});
    const FeasibleSet base = FeasibleSet::ball(Point::zero(sp), 1.0);
    const FeasibleSet region = base.intersect(ledger);
    const Point x(sp, {-0.45735855372753448, 2.1048392468597781});

    double grid_min = INFINITY, grid_best_cert = INFINITY;
    std::vector<Point> feasible;
    for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 400; ++j) {
            const Point z(sp, {-1.0 + i / 200.0, -1.0 + j / 200.0});
            if (!region.contains(z)) continue;
            feasible.push_back(z);
            grid_min = std::min(grid_min, lyapunov(x, z));
        }
    // No grid point satisfies <x - z, Jy - Jz> <= 0 on the region either.
    for (std::size_t a = 0; a < feasible.size(); a += 7) {
        const DualPoint jz = duality_map(feasible[a]);
        double worst = -INFINITY;
        for (std::size_t b = 0; b < feasible.size(); b += 13)
            worst = std::max(worst, pair(x - feasible[a], duality_map(feasible[b]) - jz));
        grid_best_cert = std::min(grid_best_cert, worst);
    }

    SolverSettings s;
    s.enforce_certificates = false;
    const auto r = sunny_retraction(x, base, ledger, s);
    CHECK(region.contains(r.point, 1e-12));
    CHECK(lyapunov(x, r.point) <= grid_min + 1e-9);
    CHECK(grid_best_cert > 0.05);
    CHECK_FALSE(r.certificate.passed);
    CHECK_THROWS_AS(sunny_retraction(x, base, ledger, SolverSettings{}), NonconvergedInnerSolve);
}
