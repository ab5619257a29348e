#include "hybridfp/problem.hpp"

#include "hybridfp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hybridfp {

int cyclic_operator_index(long n, int family_size) {
    if (family_size <= 0) throw DegenerateFamily("cyclic index over an empty family");
    if (n < 1) throw std::invalid_argument("iteration index must be >= 1");
    return static_cast<int>((n - 1) % family_size) + 1;
}

AlphaRule default_alpha_rule() {
    return [](int n) { return 1.0 / (static_cast<double>(n) + 2.0); };
}

MonotoneOperator scaled_duality_operator(const SpaceDescriptor& space, double scale) {
    if (!(scale >= 0.0)) throw std::invalid_argument("scaled duality operator needs scale >= 0");
    MonotoneOperator op;
    op.name = "scaled_duality";
    op.evaluate = [scale](const Point& x) { return duality_map(x) * scale; };
    // s Jz + (Jz - Jx)/r = 0  =>  z = x / (1 + r s) by homogeneity of J.
    op.closed_form_resolvent = [scale](const Point& x, double r) { return x * (1.0 / (1.0 + r * scale)); };
    (void)space;
    return op;
}

MonotoneOperator affine_operator(const SpaceDescriptor& space, Matrix m, Vector c) {
    const int d = space.dim();
    if (m.rows() != d || m.cols() != d || c.size() != d) throw DimensionMismatch("affine operator shape");
    // Sampled PSD check of the symmetric part.
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, sym.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("affine operator matrix is not positive semidefinite");
    MonotoneOperator op;
    op.name = "affine";
    op.evaluate = [space, m, c](const Point& x) { return DualPoint(space, m * x.coords() + c); };
    if (space.euclidean()) {
        const Matrix shifted_identity = Matrix::Identity(d, d);
        op.closed_form_resolvent = [space, m, c, shifted_identity](const Point& x, double r) {
            const Matrix lhs = shifted_identity + r * m;
            return Point(space, lhs.partialPivLu().solve(x.coords() - r * c));
        };
    }
    return op;
}

Bifunction inverse_duality_bifunction(const SpaceDescriptor& space, double scale, double orientation) {
    if (!(scale > 0.0)) throw std::invalid_argument("bifunction scale must be positive");
    if (orientation != 1.0 && orientation != -1.0) throw std::invalid_argument("orientation must be +1 or -1");
    Bifunction f;
    f.name = orientation > 0 ? "inverse_duality" : "inverse_duality_reversed";
    const double k = scale * orientation;
    f.evaluate = [k](const DualPoint& w, const DualPoint& w2) { return k * pair(inverse_duality_map(w), w2 - w); };
    f.operator_form = [k](const DualPoint& w) { return inverse_duality_map(w) * k; };
    if (orientation > 0) {
        // <s z + (z - x)/r, Jy - Jz> = 0 for every y when z = x / (1 + r s).
        f.closed_form_resolvent = [scale](const Point& x, double r) { return x * (1.0 / (1.0 + r * scale)); };
    }
    (void)space;
    return f;
}

Bifunction affine_operator_bifunction(const SpaceDescriptor& space, Matrix m, Vector c) {
    const int d = space.dim();
    if (m.rows() != d || m.cols() != d || c.size() != d) throw DimensionMismatch("affine bifunction shape");
    Bifunction f;
    f.name = "affine_operator_form";
    f.operator_form = [space, m, c](const DualPoint& w) {
        return Point(space, m * inverse_duality_map(w).coords() + c);
    };
    auto g = f.operator_form;
    f.evaluate = [g](const DualPoint& w, const DualPoint& w2) { return pair(g(w), w2 - w); };
    return f;
}

MapFamily truncated_shift_family(const SpaceDescriptor& space, AlphaRule alpha_rule, int alpha_samples) {
    if (space.dim() < 2) throw std::invalid_argument("truncated shift needs dimension >= 2");
    if (!alpha_rule) throw std::invalid_argument("alpha rule missing");
    for (int n = 1; n <= alpha_samples; ++n) {
        const double a = alpha_rule(n);
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha_n must lie in (0, 1)");
        if (1.0 - a < 0.5) throw std::invalid_argument("alpha rule violates 1 - alpha_n >= 1/2");
    }
    auto shift = [space](const Point& x) {
        Vector s = Vector::Zero(space.dim());
        s.tail(space.dim() - 1) = x.coords().head(space.dim() - 1);
        return duality_map(Point(space, s));
    };
    MapFamily fam;
    fam.name = "truncated_shift";
    fam.member = [shift, alpha_rule](int n, const Point& x) {
        const double a = alpha_rule(n);
        return duality_map(x) * a + shift(x) * (1.0 - a);
    };
    fam.limit_family = {shift};
    fam.known_j_fixed_points = {Point::zero(space)};
    fam.nst_constant = 0.5;
    return fam;
}

MapFamily identity_family(const SpaceDescriptor& space) {
    MapFamily fam;
    fam.name = "identity";
    fam.member = [](int, const Point& x) { return duality_map(x); };
    fam.limit_family = {[](const Point& x) { return duality_map(x); }};
    fam.known_j_fixed_points = {Point::zero(space)};
    fam.nst_constant = 1.0;
    return fam;
}

ProblemInstance example_problem(double p, int dim, AlphaRule alpha_rule) {
    if (dim < 2) throw std::invalid_argument("example problem needs dimension >= 2");
    const SpaceDescriptor space = SpaceDescriptor::lp(dim, p);
    ProblemInstance inst{
        "paper-example",
        space,
        FeasibleSet::ball(Point::zero(space), 1.0),
        {scaled_duality_operator(space, 1.0)},
        {inverse_duality_bifunction(space, 1.0, 1.0)},
        truncated_shift_family(space, std::move(alpha_rule)),
        {Point::zero(space)},
    };
    inst.operators.front().name = "duality_map";
    return inst;
}

ProblemInstance hilbert_affine_vi_problem(const Matrix& m, const Vector& c, const FeasibleSet& set,
                                          std::vector<Point> known_solutions) {
    const SpaceDescriptor& space = set.space();
    if (!space.euclidean()) throw std::invalid_argument("affine VI built-in requires a Hilbert space");
    return ProblemInstance{
        "hilbert-affine-vi", space, set, {affine_operator(space, m, c)}, {}, identity_family(space), std::move(known_solutions),
    };
}

ProblemInstance hilbert_affine_vi_problem(int dim, std::uint64_t seed, bool as_lp2) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    const SpaceDescriptor space = as_lp2 ? SpaceDescriptor::lp(dim, 2.0) : SpaceDescriptor::hilbert(dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector eigs(dim);
    for (int i = 0; i < dim; ++i) eigs[i] = 0.5 + 1.5 * static_cast<double>(i) / std::max(1, dim - 1);
    if (dim > 1) eigs[0] = 0.0;  // nontrivial kernel, so VI(C, A) is a segment through 0
    const Matrix m = q * eigs.asDiagonal() * q.transpose();
    return hilbert_affine_vi_problem(m, Vector::Zero(dim), FeasibleSet::ball(Point::zero(space), 10.0),
                                     {Point::zero(space)});
}

// ---- verification ----

bool VerificationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

const PropertyCheck* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

struct SlackAccumulator {
    PropertyCheck check;
    SlackAccumulator(std::string name, double tol) {
        check.name = std::move(name);
        check.tolerance = tol;
        check.worst_slack = -std::numeric_limits<double>::infinity();
    }
    void add(double slack) {
        check.worst_slack = std::max(check.worst_slack, slack);
        ++check.samples;
    }
    PropertyCheck finish() {
        if (check.samples == 0) check.worst_slack = 0.0;
        check.passed = check.worst_slack <= check.tolerance;
        return check;
    }
};

Point feasible_seed(const ProblemInstance& inst) {
    for (const auto& p : inst.known_common_solutions)
        if (inst.feasible_set.contains(p, 1e-12)) return p;
    if (inst.feasible_set.ball_part()) return inst.feasible_set.ball_part()->center;
    return Point(inst.space, euclidean_projection(Vector::Zero(inst.space.dim()), inst.feasible_set));
}

}  // namespace

VerificationReport verify_problem(const ProblemInstance& inst, int samples, std::uint64_t rng_seed) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    std::mt19937_64 rng(rng_seed);
    const Point seed = feasible_seed(inst);
    const std::vector<Point> pts = inst.feasible_set.sample(seed, samples, rng);
    const std::vector<Point> others = inst.feasible_set.sample(seed, samples, rng);
    const std::vector<Point> thirds = inst.feasible_set.sample(seed, samples, rng);
    VerificationReport report;

    for (const auto& op : inst.operators) {
        SlackAccumulator acc("operator_monotone[" + op.name + "]", 1e-10);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Point& x = pts[i];
            const Point& y = others[i];
            acc.add(-pair(x - y, op.evaluate(x) - op.evaluate(y)));
        }
        report.checks.push_back(acc.finish());
    }

    for (const auto& f : inst.bifunctions) {
        SlackAccumulator a1("bifunction_A1[" + f.name + "]", 1e-12);
        SlackAccumulator a2("bifunction_A2[" + f.name + "]", 1e-10);
        SlackAccumulator a4("bifunction_A4[" + f.name + "]", 1e-10);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const DualPoint w = duality_map(pts[i]);
            const DualPoint w2 = duality_map(others[i]);
            const DualPoint w3 = duality_map(thirds[i]);
            a1.add(std::abs(f.evaluate(w, w)));
            a2.add(f.evaluate(w, w2) + f.evaluate(w2, w));
            a4.add(f.evaluate(w, (w2 + w3) * 0.5) - 0.5 * (f.evaluate(w, w2) + f.evaluate(w, w3)));
        }
        report.checks.push_back(a1.finish());
        report.checks.push_back(a2.finish());
        report.checks.push_back(a4.finish());
    }

    const MapFamily& maps = inst.maps;
    {
        SlackAccumulator acc("maps_j_fixed_point", 1e-10);
        for (const auto& t : maps.limit_family)
            for (const auto& p : maps.known_j_fixed_points) acc.add(dual_norm(t(p) - duality_map(p)));
        report.checks.push_back(acc.finish());
    }
    {
        SlackAccumulator acc("maps_generalized_nonexpansive", 1e-10);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int n = static_cast<int>(i) + 1;
            for (const auto& p : maps.known_j_fixed_points) {
                const double base = lyapunov(p, pts[i]);
                acc.add(lyapunov(p, inverse_duality_map(maps.member(n, pts[i]))) - base);
                for (const auto& t : maps.limit_family) acc.add(lyapunov(p, inverse_duality_map(t(pts[i]))) - base);
            }
        }
        report.checks.push_back(acc.finish());
    }
    if (maps.nst_constant) {
        SlackAccumulator acc("maps_nst_proxy", 1e-10);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int n = static_cast<int>(i) + 1;
            const DualPoint jx = duality_map(pts[i]);
            double limit_residual = 0.0;
            for (const auto& t : maps.limit_family) limit_residual = std::max(limit_residual, dual_norm(jx - t(pts[i])));
            acc.add(*maps.nst_constant * limit_residual - dual_norm(jx - maps.member(n, pts[i])));
        }
        report.checks.push_back(acc.finish());
    }

    if (!inst.known_common_solutions.empty()) {
        SlackAccumulator fixed("maps_solution_j_fixed_point", 1e-10);
        for (const auto& p : inst.known_common_solutions)
            for (const auto& t : maps.limit_family) fixed.add(dual_norm(t(p) - duality_map(p)));
        report.checks.push_back(fixed.finish());

        if (!inst.operators.empty()) {
            SlackAccumulator vi("solution_vi_residual", 1e-10);
            for (const auto& p : inst.known_common_solutions)
                for (const auto& op : inst.operators) {
                    const DualPoint ap = op.evaluate(p);
                    for (const auto& y : pts) vi.add(-pair(y - p, ap));
                }
            report.checks.push_back(vi.finish());
        }
        if (!inst.bifunctions.empty()) {
            SlackAccumulator ep("solution_ep_residual", 1e-10);
            for (const auto& p : inst.known_common_solutions)
                for (const auto& f : inst.bifunctions) {
                    const DualPoint jp = duality_map(p);
                    for (const auto& y : pts) ep.add(-f.evaluate(jp, duality_map(y)));
                }
            report.checks.push_back(ep.finish());
        }
    }
    return report;
}

}  // namespace hybridfp
