#include "hybridfp/bregman.hpp"

#include "hybridfp/projection.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <functional>

namespace hybridfp {

namespace {

constexpr double kMetricFloor = 1e-4;
constexpr double kGradientFloor = 1e-12;

struct Objective {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> half_gradient;
};

BregmanSolve newton_on_polyhedron(const SpaceDescriptor& sp, const Objective& obj, const LinearRows& rows,
                                  const Vector& start, const NewtonControl& control) {
    BregmanSolve out{project_onto_polyhedron(start, rows), 0, false};
    Vector& z = out.point;
    double fz = obj.value(z);
    for (int it = 0; it < control.max_iters; ++it) {
        out.iterations = it + 1;
        const Vector g = obj.half_gradient(z);
        Matrix metric = sp.duality_jacobian(z, kMetricFloor);
        metric.diagonal().array() += 1e-12 * (1.0 + metric.diagonal().cwiseAbs().maxCoeff());
        const Vector trial = metric_step_onto_polyhedron(z, g, metric, rows);
        const Vector dz = trial - z;
        const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
        if (dz.cwiseAbs().maxCoeff() <= control.tol * scale) {
            out.converged = true;
            break;
        }
        // Armijo on the objective along the feasible segment.
        const double slope = 2.0 * g.dot(dz);
        double beta = 1.0;
        Vector next = trial;
        double fnext = obj.value(next);
        while (fnext > fz + 1e-4 * beta * slope && beta > 1e-12) {
            beta *= 0.5;
            next = z + beta * dz;
            fnext = obj.value(next);
        }
        if (beta <= 1e-12 || fnext >= fz) {
            // No further decrease is representable.
            out.converged = dz.cwiseAbs().maxCoeff() <= 1e-8 * scale;
            if (fnext < fz) z = next;
            break;
        }
        z = next;
        fz = fnext;
    }
    return out;
}

// Solves argmin over ball(c, rho) ∩ P by the Lagrangian scaling
// z(s) = solve_p(s * target + (1 - s) c), s = 1 / (1 + mu), with |z(s) - c|
// nondecreasing in s. c != 0 only occurs in Euclidean geometry.
BregmanSolve scaled_ball_solve(const SpaceDescriptor& sp, const Vector& target, const Vector& center, double rho,
                               const std::function<BregmanSolve(const Vector&, const Vector&)>& solve_p) {
    auto dist = [&](const Vector& z) { return sp.primal_norm(z - center); };
    auto mix = [&](double s) -> Vector { return s * target + (1.0 - s) * center; };
    Vector warm = target;
    BregmanSolve full = solve_p(target, warm);
    if (dist(full.point) <= rho) return full;
    BregmanSolve inner = solve_p(center, full.point);
    if (dist(inner.point) > rho * (1.0 + 1e-12)) throw InfeasibleRegion("ball and linear constraints do not intersect");

    int total = full.iterations + inner.iterations;
    bool converged = full.converged && inner.converged;
    warm = full.point;
    // Nonconvex images can make dist(z(s)) jump; keep the feasible solve with the largest s.
    double best_s = 0.0;
    BregmanSolve best = inner;
    auto gap = [&](double s) {
        BregmanSolve r = solve_p(mix(s), warm);
        total += r.iterations;
        converged = converged && r.converged;
        warm = r.point;
        const double g = dist(r.point) - rho;
        if (g <= 0.0 && s >= best_s) best_s = s, best = r;
        return g;
    };
    const double g_lo = dist(inner.point) - rho;
    const double g_hi = dist(full.point) - rho;
    if (g_lo >= 0.0) return inner;
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(gap, 0.0, 1.0, g_lo, g_hi,
                                                           boost::math::tools::eps_tolerance<double>(50), max_iter);
    BregmanSolve out = solve_p(mix(bracket.first), warm);
    if (dist(out.point) > rho * (1.0 + 1e-12)) out = best;
    out.iterations += total;
    out.converged = out.converged && converged;
    return out;
}

}  // namespace

BregmanSolve lyapunov_retraction(const SpaceDescriptor& sp, const Vector& x, const FeasibleSet& set,
                                 const NewtonControl& control, bool force_newton) {
    if (sp.euclidean() && !force_newton) return {euclidean_projection(x, set), 1, true};
    if (set.contains(Point(sp, x), 0.0)) return {x, 0, true};

    const LinearRows rows = set.linear_rows();
    auto solve_p = [&](const Vector& target, const Vector& warm) -> BregmanSolve {
        if (rows.rows() == 0) return {target, 0, true};
        if (((rows.a * target - rows.b).array() <= 0.0).all()) return {target, 0, true};
        const Objective obj{
            [&sp, target](const Vector& z) {
                const double nt = sp.primal_norm(target);
                const double nz = sp.primal_norm(z);
                return nt * nt - 2.0 * target.dot(sp.duality(z)) + nz * nz;
            },
            [&sp, target](const Vector& z) -> Vector {
                return sp.duality_jacobian(z, kGradientFloor) * (z - target);
            }};
        // phi(target, .) is nonconvex on a polyhedron unless J is linear: keep the best of a few starts.
        BregmanSolve best = newton_on_polyhedron(sp, obj, rows, warm, control);
        if (sp.euclidean()) return best;
        double fbest = obj.value(best.point);
        for (double t : {1.0, 0.5, 0.0, -0.5}) {
            BregmanSolve r = newton_on_polyhedron(sp, obj, rows, t * target, control);
            const double fr = obj.value(r.point);
            r.iterations += best.iterations;
            if (fr < fbest) fbest = fr, best = r;
            else best.iterations = r.iterations;
        }
        return best;
    };
    const auto& ball = set.ball_part();
    if (!ball) return solve_p(x, x);
    return scaled_ball_solve(sp, x, ball->center.coords(), ball->radius, solve_p);
}

BregmanSolve generalized_projection(const SpaceDescriptor& sp, const Vector& xi, const FeasibleSet& set,
                                    const NewtonControl& control) {
    if (sp.euclidean()) return {euclidean_projection(xi, set), 1, true};

    const LinearRows rows = set.linear_rows();
    auto solve_p = [&](const Vector& target, const Vector& warm) -> BregmanSolve {
        const Vector free_min = sp.inverse_duality(target);
        if (rows.rows() == 0) return {free_min, 0, true};
        if (((rows.a * free_min - rows.b).array() <= 0.0).all()) return {free_min, 0, true};
        const Objective obj{
            [&sp, target](const Vector& y) {
                const double ny = sp.primal_norm(y);
                return ny * ny - 2.0 * y.dot(target);
            },
            [&sp, target](const Vector& y) -> Vector { return sp.duality(y) - target; }};
        return newton_on_polyhedron(sp, obj, rows, warm, control);
    };
    const auto& ball = set.ball_part();
    if (!ball) return solve_p(xi, sp.inverse_duality(xi));
    return scaled_ball_solve(sp, xi, ball->center.coords(), ball->radius, solve_p);
}

}  // namespace hybridfp
