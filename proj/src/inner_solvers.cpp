#include "hybridfp/inner_solvers.hpp"

#include "hybridfp/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hybridfp {

void SolverSettings::validate() const {
    if (!(inner_tol > 0.0)) throw std::invalid_argument("inner_tol must be positive");
    if (!(certificate_tol > 0.0)) throw std::invalid_argument("certificate_tol must be positive");
    if (max_inner_iters < 1) throw std::invalid_argument("max_inner_iters must be >= 1");
    if (certificate_samples < 0) throw std::invalid_argument("certificate_samples must be >= 0");
}

const char* to_string(CertificateKind kind) {
    switch (kind) {
        case CertificateKind::EqResolvent: return "eq_resolvent";
        case CertificateKind::ViResolvent: return "vi_resolvent";
        case CertificateKind::Retraction: return "retraction";
    }
    return "unknown";
}

namespace {

Certificate finish(CertificateKind kind, double worst, int count, double tol) {
    Certificate c;
    c.kind = kind;
    c.samples_checked = count;
    c.worst_violation = count == 0 ? 0.0 : worst;
    c.tolerance = tol;
    c.passed = c.worst_violation <= tol;
    return c;
}

NewtonControl newton_control(const SolverSettings& s) { return NewtonControl{1e-12, std::max(50, s.max_inner_iters / 20)}; }

// Extragradient for <y - u, F(u)> >= 0 over `set`, F(u) = A u + (Ju - Jx)/r,
// with Bregman (generalized) projections. In Hilbert space this is the
// Korpelevich scheme.
struct ExtragradientResult {
    Vector point;
    int iterations = 0;
};

ExtragradientResult bregman_extragradient(const SpaceDescriptor& sp, const std::function<Vector(const Vector&)>& op,
                                          double r, const Vector& x, const FeasibleSet& set,
                                          const SolverSettings& settings) {
    const NewtonControl ctl = newton_control(settings);
    const Vector jx = sp.duality(x);
    auto project = [&](const Vector& xi) { return generalized_projection(sp, xi, set, ctl).point; };

    Vector u = project(jx);

    // Lipschitz estimate of A from sampled pairs.
    std::mt19937_64 rng(settings.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    const auto pts = set.sample(Point(sp, u), 16, rng);
    double lip = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double dx = sp.primal_norm(pts[i].coords() - pts[i + 1].coords());
        if (dx < 1e-12) continue;
        lip = std::max(lip, sp.dual_norm(op(pts[i].coords()) - op(pts[i + 1].coords())) / dx);
    }
    double gamma = 0.5 * r / (1.0 + r * lip);

    auto field = [&](const Vector& v, const Vector& jv) -> Vector { return op(v) + (jv - jx) / r; };

    ExtragradientResult out{u, 0};
    double prev_change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < settings.max_inner_iters; ++it) {
        out.iterations = it + 1;
        const Vector ju = sp.duality(u);
        const Vector fu = field(u, ju);
        const Vector bar = project(ju - gamma * fu);
        const Vector jbar = sp.duality(bar);
        const Vector fbar = field(bar, jbar);
        const double dual_gap = sp.dual_norm(ju - jbar);
        if (gamma * sp.dual_norm(fu - fbar) > 0.9 * dual_gap && dual_gap > 0.0 && gamma > 1e-14) {
            gamma *= 0.5;
            continue;
        }
        const Vector next = project(ju - gamma * fbar);
        const double change = (next - u).cwiseAbs().maxCoeff();
        u = next;
        if (change == 0.0) break;
        // A posteriori error estimate for a linearly convergent sequence.
        const double rate = std::min(change / prev_change, 0.999);
        prev_change = change;
        if (change <= settings.inner_tol && change * rate / (1.0 - rate) <= 0.1 * settings.inner_tol) break;
    }
    out.point = u;
    return out;
}

// J(C) as a feasible set of E*; representable for Euclidean geometry and for
// origin-centred l_p balls.
FeasibleSet dual_image(const FeasibleSet& set) {
    const SpaceDescriptor& sp = set.space();
    const SpaceDescriptor dual = sp.dual();
    if (sp.euclidean()) {
        FeasibleSet out = set.ball_part() ? FeasibleSet::ball(Point(dual, set.ball_part()->center.coords()), set.ball_part()->radius)
                                          : FeasibleSet::whole_space(dual);
        if (set.box_part()) {
            FeasibleSet boxed = FeasibleSet::box(dual, set.box_part()->lower, set.box_part()->upper);
            if (set.ball_part())
                throw UnsupportedProblem("ball and box together are not supported by the generic equilibrium path");
            out = boxed;
        }
        std::vector<HalfSpace> hs;
        for (const auto& h : set.halfspaces())
            hs.push_back(HalfSpace{DualPoint(dual, h.normal.coords()), h.offset, h.provenance});
        return out.intersect(hs);
    }
    if (set.ball_part() && !set.box_part() && set.halfspaces().empty())
        return FeasibleSet::ball(Point::zero(dual), set.ball_part()->radius);
    if (!set.ball_part() && !set.has_linear_part()) return FeasibleSet::whole_space(dual);
    throw UnsupportedProblem("generic equilibrium resolvent in l_p needs an origin-centred ball feasible set");
}

}  // namespace

std::vector<Point> certificate_points(const FeasibleSet& set, const Point& center, const Point& x,
                                      const std::vector<Point>& extra_points, const SolverSettings& settings) {
    std::mt19937_64 rng(settings.rng_seed);
    std::vector<Point> pts = set.sample(center, settings.certificate_samples, rng);
    for (const auto& p : extra_points)
        if (set.contains(p, 1e-10)) pts.push_back(p);
    if (set.contains(x, 1e-12)) pts.push_back(x);
    for (auto& p : set.axis_boundary_points()) pts.push_back(std::move(p));
    return pts;
}

Certificate eq_certificate(const Bifunction& f, double r, const Point& x, const Point& z,
                           const std::vector<Point>& samples, double tol) {
    const DualPoint jz = duality_map(z);
    const Point zx = z - x;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& y : samples) {
        const DualPoint jy = duality_map(y);
        worst = std::max(worst, -(f.evaluate(jz, jy) + pair(zx, jy - jz) / r));
    }
    return finish(CertificateKind::EqResolvent, worst, static_cast<int>(samples.size()), tol);
}

Certificate vi_certificate(const MonotoneOperator& a, double r, const Point& x, const Point& u,
                           const std::vector<Point>& samples, double tol) {
    const DualPoint field = a.evaluate(u) + (duality_map(u) - duality_map(x)) * (1.0 / r);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& y : samples) worst = std::max(worst, -pair(y - u, field));
    return finish(CertificateKind::ViResolvent, worst, static_cast<int>(samples.size()), tol);
}

Certificate retraction_certificate(const Point& x, const Point& rx, const std::vector<Point>& samples, double tol) {
    const DualPoint jr = duality_map(rx);
    const Point gap = x - rx;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& y : samples) worst = std::max(worst, pair(gap, duality_map(y) - jr));
    return finish(CertificateKind::Retraction, worst, static_cast<int>(samples.size()), tol);
}

InnerSolution vi_resolvent_iterative(const MonotoneOperator& a, double r, const Point& x, const FeasibleSet& set,
                                     const SolverSettings& settings, const std::vector<Point>& extra_points) {
    if (!(r > 0.0)) throw std::invalid_argument("resolvent parameter r must be positive");
    const SpaceDescriptor& sp = x.space();
    auto op = [&](const Vector& v) { return a.evaluate(Point(sp, v)).coords(); };
    const ExtragradientResult res = bregman_extragradient(sp, op, r, x.coords(), set, settings);
    Point u(sp, res.point);
    const Certificate cert =
        vi_certificate(a, r, x, u, certificate_points(set, u, x, extra_points, settings), settings.certificate_tol);
    if (!cert.passed && settings.enforce_certificates) throw NonconvergedInnerSolve("vi resolvent certificate failed", u, cert);
    return InnerSolution{u, cert, false, res.iterations};
}

InnerSolution vi_resolvent(const MonotoneOperator& a, double r, const Point& x, const FeasibleSet& set,
                           const SolverSettings& settings, const std::vector<Point>& extra_points) {
    if (!(r > 0.0)) throw std::invalid_argument("resolvent parameter r must be positive");
    if (a.closed_form_resolvent) {
        Point u = a.closed_form_resolvent(x, r);
        if (set.contains(u, 1e-12)) {
            const Certificate cert = vi_certificate(a, r, x, u, certificate_points(set, u, x, extra_points, settings),
                                                    settings.certificate_tol);
            if (cert.passed) return InnerSolution{u, cert, true, 0};
        }
    }
    return vi_resolvent_iterative(a, r, x, set, settings, extra_points);
}

InnerSolution eq_resolvent_iterative(const Bifunction& f, double r, const Point& x, const FeasibleSet& set,
                                     const SolverSettings& settings, const std::vector<Point>& extra_points) {
    if (!(r > 0.0)) throw std::invalid_argument("resolvent parameter r must be positive");
    if (!f.operator_form)
        throw UnsupportedProblem("bifunction '" + f.name + "' has neither a closed-form resolvent nor an operator form");
    const SpaceDescriptor& sp = x.space();
    const SpaceDescriptor dual = sp.dual();
    const FeasibleSet image = dual_image(set);
    // The EP resolvent is the VI resolvent of G on E* over JC anchored at Jx.
    auto op = [&](const Vector& w) { return f.operator_form(DualPoint(sp, w)).coords(); };
    const ExtragradientResult res = bregman_extragradient(dual, op, r, sp.duality(x.coords()), image, settings);
    Point z(sp, sp.inverse_duality(res.point));
    const Certificate cert =
        eq_certificate(f, r, x, z, certificate_points(set, z, x, extra_points, settings), settings.certificate_tol);
    if (!cert.passed && settings.enforce_certificates) throw NonconvergedInnerSolve("equilibrium resolvent certificate failed", z, cert);
    return InnerSolution{z, cert, false, res.iterations};
}

InnerSolution eq_resolvent(const Bifunction& f, double r, const Point& x, const FeasibleSet& set,
                           const SolverSettings& settings, const std::vector<Point>& extra_points) {
    if (!(r > 0.0)) throw std::invalid_argument("resolvent parameter r must be positive");
    if (f.closed_form_resolvent) {
        Point z = f.closed_form_resolvent(x, r);
        Certificate cert;
        bool tried = false;
        if (set.contains(z, 1e-12)) {
            tried = true;
            cert = eq_certificate(f, r, x, z, certificate_points(set, z, x, extra_points, settings),
                                  settings.certificate_tol);
            if (cert.passed) return InnerSolution{z, cert, true, 0};
        }
        if (!f.operator_form) {
            if (!tried) cert = eq_certificate(f, r, x, z, {}, settings.certificate_tol);
            throw NonconvergedInnerSolve("closed-form equilibrium resolvent left the feasible set", z, cert);
        }
    }
    return eq_resolvent_iterative(f, r, x, set, settings, extra_points);
}

InnerSolution sunny_retraction(const Point& x, const FeasibleSet& base, const std::vector<HalfSpace>& ledger,
                               const SolverSettings& settings, const std::vector<Point>& extra_points,
                               RetractionPath path) {
    if (settings.max_ledger != 0 && ledger.size() > settings.max_ledger)
        throw LedgerCapExceeded("half-space ledger exceeded max_ledger = " + std::to_string(settings.max_ledger));
    const SpaceDescriptor& sp = x.space();
    require_same_space(sp, base.space(), "retraction");
    const FeasibleSet region = base.intersect(ledger);

    if (region.contains(x, 1e-12)) {
        const Certificate cert = retraction_certificate(
            x, x, certificate_points(region, x, x, extra_points, settings), settings.certificate_tol);
        return InnerSolution{x, cert, true, 0};
    }

    Vector rx;
    int iterations = 0;
    switch (path) {
        case RetractionPath::Dykstra: {
            if (!sp.euclidean()) throw UnsupportedProblem("Dykstra retraction requires a Euclidean geometry");
            const DykstraResult d = dykstra_projection(x.coords(), region, settings.inner_tol, settings.max_inner_iters);
            rx = d.point;
            iterations = d.sweeps;
            break;
        }
        case RetractionPath::Auto:
        case RetractionPath::DualNewton: {
            const BregmanSolve s = lyapunov_retraction(sp, x.coords(), region, newton_control(settings),
                                                       path == RetractionPath::DualNewton);
            rx = s.point;
            iterations = s.iterations;
            break;
        }
    }
    Point result(sp, rx);
    const Certificate cert = retraction_certificate(
        x, result, certificate_points(region, result, x, extra_points, settings), settings.certificate_tol);
    if (!cert.passed && settings.enforce_certificates) throw NonconvergedInnerSolve("retraction certificate failed", result, cert);
    return InnerSolution{result, cert, false, iterations};
}

HalfSpace halfspace_from_iterates(const Point& x, const Point& y, int provenance) {
    require_same_space(x.space(), y.space(), "half-space from iterates");
    const double nx = norm(x);
    const double ny = norm(y);
    return HalfSpace{duality_map(x) - duality_map(y), nx * nx - ny * ny, provenance};
}

}  // namespace hybridfp
