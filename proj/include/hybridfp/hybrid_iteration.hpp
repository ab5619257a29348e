#pragma once

#include "hybridfp/inner_solvers.hpp"
#include "hybridfp/problem.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hybridfp {

using RRule = std::function<double(int)>;

struct AlgorithmParams {
    std::array<double, 3> alpha{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    RRule r_rule = [](int) { return 1.0; };
    double a = 1.0;  // lower bound of r_rule
    int max_iters = 1000;
    double stop_tol = 1e-8;
    Point anchor;

    explicit AlgorithmParams(Point anchor_point) : anchor(std::move(anchor_point)) {}

    /// Throws std::invalid_argument describing the first violated requirement.
    void validate(const ProblemInstance& instance) const;
};

struct IterationRecord {
    explicit IterationRecord(const Point& at) : x(at), y(at), z(at), u(at) {}

    int n = 0;
    Point x, y, z, u;
    double phi_anchor = 0.0;     // phi(anchor, x_n)
    double step_norm = 0.0;      // ||x_{n+1} - x_n||
    double residual_xy = 0.0;    // ||x_n - y_n||
    double residual_fp = 0.0;    // ||J u_n - T_n u_n||*
    double cert_eq = 0.0;
    double cert_vi = 0.0;
    double cert_r = 0.0;
    std::optional<double> sol_dist;  // ||x_n - p|| for the first known solution
    std::optional<HalfSpace> cut;    // half-space added at this step
    std::optional<Point> next;       // x_{n+1}
};

enum class TerminalStatus { Converged, MaxIters, InnerSolveFailed, InfeasibleLedger };

const char* to_string(TerminalStatus status);

struct IterationTrace {
    std::vector<IterationRecord> records;
    TerminalStatus status = TerminalStatus::MaxIters;
    Point final_point;
    std::string message;
    std::vector<HalfSpace> ledger;
};

struct StepResult {
    Point next;
    IterationRecord record;
};

/// One outer iteration from x_n; appends the new half-space to `ledger`.
StepResult step(int n, const Point& x_n, std::vector<HalfSpace>& ledger, const ProblemInstance& instance,
                const AlgorithmParams& params, const SolverSettings& settings);

using RecordObserver = std::function<void(const IterationRecord&)>;

/// Iterates from x_1 = anchor. Never throws for inner failures; they end the trace.
IterationTrace run(const ProblemInstance& instance, const AlgorithmParams& params, const SolverSettings& settings,
                   const RecordObserver& observer = {});

struct InvariantViolation {
    std::string check;
    int n = 0;
    double slack = 0.0;
};

struct InvariantReport {
    std::vector<InvariantViolation> violations;
    std::array<double, 4> worst{0.0, 0.0, 0.0, 0.0};  // largest violation per check (i)-(iv)
    int records_checked = 0;
    bool passed() const { return violations.empty(); }
};

/// (i) phi(x, x_n) nondecreasing; (ii) known solutions stay in every cut and
/// phi(u, y_n) <= phi(u, x_n); (iii) x_{n+1} satisfies the ledger so far;
/// (iv) phi(x_n, x_m) <= phi(x, x_m) - phi(x, x_n) for m > n.
InvariantReport check_trace_invariants(const IterationTrace& trace, const ProblemInstance& instance,
                                       double tol = 1e-8);

}  // namespace hybridfp
