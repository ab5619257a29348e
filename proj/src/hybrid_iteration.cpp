#include "hybridfp/hybrid_iteration.hpp"

#include "hybridfp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hybridfp {

const char* to_string(TerminalStatus status) {
    switch (status) {
        case TerminalStatus::Converged: return "Converged";
        case TerminalStatus::MaxIters: return "MaxIters";
        case TerminalStatus::InnerSolveFailed: return "InnerSolveFailed";
        case TerminalStatus::InfeasibleLedger: return "InfeasibleLedger";
    }
    return "unknown";
}

void AlgorithmParams::validate(const ProblemInstance& instance) const {
    const double sum = alpha[0] + alpha[1] + alpha[2];
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "alpha must lie on the simplex: alpha1 + alpha2 + alpha3 = " << sum << ", expected 1";
        throw std::invalid_argument(msg.str());
    }
    for (double a_i : alpha)
        if (!(a_i > 0.0 && a_i < 1.0)) throw std::invalid_argument("each alpha_i must lie in (0, 1)");
    if (!(a > 0.0)) throw std::invalid_argument("r lower bound a must be positive");
    if (!r_rule) throw std::invalid_argument("r_rule is not set");
    for (int n = 1; n <= 256; ++n) {
        const double r = r_rule(n);
        if (!std::isfinite(r) || r < a)
            throw std::invalid_argument("r_rule(" + std::to_string(n) + ") = " + std::to_string(r) +
                                        " is below the lower bound a = " + std::to_string(a));
    }
    if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    if (!(stop_tol > 0.0)) throw std::invalid_argument("stop_tol must be positive");
    require_same_space(anchor.space(), instance.space, "anchor");
    if (!instance.feasible_set.contains(anchor, 1e-12))
        throw std::invalid_argument("anchor must lie in the feasible set");
}

namespace {

SolverSettings for_iteration(const SolverSettings& s, int n) {
    SolverSettings out = s;
    out.rng_seed = s.rng_seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(n);
    return out;
}

DualPoint apply_family(const MapFamily& maps, int n, const Point& u) {
    if (!maps.member) return duality_map(u);
    return maps.member(n, u);
}

IterationRecord initial_record(const ProblemInstance& instance, const Point& anchor) {
    IterationRecord rec(anchor);
    rec.n = 0;
    rec.phi_anchor = 0.0;
    if (!instance.known_common_solutions.empty())
        rec.sol_dist = norm(anchor - instance.known_common_solutions.front());
    return rec;
}

}  // namespace

StepResult step(int n, const Point& x_n, std::vector<HalfSpace>& ledger, const ProblemInstance& instance,
                const AlgorithmParams& params, const SolverSettings& settings) {
    const SolverSettings s = for_iteration(settings, n);
    const double r = params.r_rule(n);
    const auto& known = instance.known_common_solutions;
    const FeasibleSet& c = instance.feasible_set;

    IterationRecord rec(x_n);
    rec.n = n;

    if (instance.bifunctions.empty()) {
        rec.z = x_n;
    } else {
        const auto& f = instance.bifunctions[cyclic_operator_index(n, static_cast<int>(instance.bifunctions.size())) - 1];
        InnerSolution z = eq_resolvent(f, r, x_n, c, s, known);
        rec.z = z.point;
        rec.cert_eq = z.certificate.worst_violation;
    }

    if (instance.operators.empty()) {
        rec.u = x_n;
    } else {
        const auto& a = instance.operators[cyclic_operator_index(n, static_cast<int>(instance.operators.size())) - 1];
        InnerSolution u = vi_resolvent(a, r, x_n, c, s, known);
        rec.u = u.point;
        rec.cert_vi = u.certificate.worst_violation;
    }

    const auto& al = params.alpha;
    const DualPoint tu = apply_family(instance.maps, n, rec.u);
    const DualPoint mix = duality_map(x_n) * al[0] + duality_map(rec.z) * al[1] + tu * al[2];
    rec.y = inverse_duality_map(mix);
    rec.residual_fp = dual_norm(duality_map(rec.u) - tu);
    rec.residual_xy = norm(x_n - rec.y);
    rec.phi_anchor = lyapunov(params.anchor, x_n);
    if (!known.empty()) rec.sol_dist = norm(x_n - known.front());

    HalfSpace cut = halfspace_from_iterates(x_n, rec.y, n);
    ledger.push_back(cut);
    rec.cut = cut;

    InnerSolution next = sunny_retraction(params.anchor, c, ledger, s, known);
    rec.cert_r = next.certificate.worst_violation;
    rec.step_norm = norm(next.point - x_n);
    rec.next = next.point;
    return StepResult{next.point, std::move(rec)};
}

IterationTrace run(const ProblemInstance& instance, const AlgorithmParams& params, const SolverSettings& settings,
                   const RecordObserver& observer) {
    IterationTrace trace{{}, TerminalStatus::MaxIters, params.anchor, {}, {}};
    if (params.max_iters == 0) {
        trace.records.push_back(initial_record(instance, params.anchor));
        trace.message = "max_iters = 0";
        return trace;
    }
    Point x = params.anchor;
    std::vector<HalfSpace> ledger;
    auto fail = [&](TerminalStatus status, const std::string& what, int n) {
        if (trace.records.empty()) trace.records.push_back(initial_record(instance, params.anchor));
        trace.status = status;
        trace.message = "iteration " + std::to_string(n) + ": " + what;
    };
    for (int n = 1; n <= params.max_iters; ++n) {
        try {
            StepResult res = step(n, x, ledger, instance, params, settings);
            const double step_norm = res.record.step_norm;
            if (observer) observer(res.record);
            trace.records.push_back(std::move(res.record));
            x = res.next;
            trace.final_point = x;
            if (step_norm <= params.stop_tol) {
                trace.status = TerminalStatus::Converged;
                break;
            }
        } catch (const InfeasibleRegion& e) {
            fail(TerminalStatus::InfeasibleLedger, e.what(), n);
            break;
        } catch (const NonconvergedInnerSolve& e) {
            fail(TerminalStatus::InnerSolveFailed,
                 std::string(e.what()) + " (worst violation " + std::to_string(e.certificate().worst_violation) + ")",
                 n);
            break;
        } catch (const std::exception& e) {
            fail(TerminalStatus::InnerSolveFailed, e.what(), n);
            break;
        }
    }
    trace.ledger = std::move(ledger);
    return trace;
}

InvariantReport check_trace_invariants(const IterationTrace& trace, const ProblemInstance& instance, double tol) {
    InvariantReport rep;
    const auto& recs = trace.records;
    rep.records_checked = static_cast<int>(recs.size());
    auto note = [&](int idx, const char* name, int n, double slack) {
        if (slack > rep.worst[idx]) rep.worst[idx] = slack;
        if (slack > tol) rep.violations.push_back({name, n, slack});
    };
    if (recs.empty()) return rep;

    const Point& anchor = recs.front().x;

    // (i)
    for (std::size_t k = 0; k < recs.size(); ++k) {
        const IterationRecord& r = recs[k];
        if (!r.next) continue;
        const double next_phi = lyapunov(anchor, *r.next);
        note(0, "anchor_monotone", r.n, lyapunov(anchor, r.x) - next_phi);
    }

    // (ii)
    for (const auto& u : instance.known_common_solutions) {
        for (const auto& r : recs) {
            if (!r.cut) continue;
            note(1, "key_decrease", r.n, lyapunov(u, r.y) - lyapunov(u, r.x));
            note(1, "solution_in_cut", r.n, r.cut->violation(u));
        }
    }

    // (iii)
    std::vector<const HalfSpace*> cuts;
    for (const auto& r : recs) {
        if (r.cut) cuts.push_back(&*r.cut);
        if (!r.next) continue;
        double worst = -std::numeric_limits<double>::infinity();
        for (const HalfSpace* h : cuts) worst = std::max(worst, h->violation(*r.next));
        note(2, "ledger_feasible", r.n, worst);
    }

    // (iv) x_m in C_n for m > n and x_n = R_{C_n} x.
    std::vector<const Point*> xs;
    for (const auto& r : recs)
        if (r.n > 0) xs.push_back(&r.x);
    if (!recs.empty() && recs.back().next) xs.push_back(&*recs.back().next);
    std::vector<double> phi_x(xs.size()), sq(xs.size());
    std::vector<DualPoint> jx;
    jx.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        phi_x[i] = lyapunov(anchor, *xs[i]);
        const double nn = norm(*xs[i]);
        sq[i] = nn * nn;
        jx.push_back(duality_map(*xs[i]));
    }
    for (std::size_t m = 1; m < xs.size(); ++m) {
        const double scale = 1.0 + phi_x[m];
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double phi_nm = sq[i] - 2.0 * pair(*xs[i], jx[m]) + sq[m];
            worst = std::max(worst, (phi_nm - (phi_x[m] - phi_x[i])) / scale);
        }
        note(3, "cauchy_bound", static_cast<int>(m) + 1, worst);
    }
    return rep;
}

}  // namespace hybridfp
