#pragma once

#include "hybridfp/feasible_set.hpp"
#include "hybridfp/problem.hpp"
#include "hybridfp/projection.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridfp {

struct SolverSettings {
    double inner_tol = 1e-8;        // successive-change tolerance of iterative paths
    int max_inner_iters = 10000;
    int certificate_samples = 64;
    double certificate_tol = 1e-6;
    std::uint64_t rng_seed = 0;
    std::size_t max_ledger = 0;     // 0 = unlimited
    bool enforce_certificates = true;  // false: return failed certificates instead of throwing

    void validate() const;
};

enum class CertificateKind { EqResolvent, ViResolvent, Retraction };

const char* to_string(CertificateKind kind);

/// Sampled witness of a defining variational inequality.
struct Certificate {
    CertificateKind kind = CertificateKind::Retraction;
    double worst_violation = 0.0;
    int samples_checked = 0;
    double tolerance = 0.0;
    bool passed = true;
};

class NonconvergedInnerSolve : public std::runtime_error {
public:
    NonconvergedInnerSolve(const std::string& what, Point best, Certificate cert)
        : std::runtime_error(what), best_(std::move(best)), certificate_(cert) {}
    const Point& best_iterate() const { return best_; }
    const Certificate& certificate() const { return certificate_; }

private:
    Point best_;
    Certificate certificate_;
};

class LedgerCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct InnerSolution {
    Point point;
    Certificate certificate;
    bool closed_form = false;
    int iterations = 0;
};

/// Resolvent of the equilibrium problem: z in C with
///   f(Jz, Jy) + (1/r) <z - x, Jy - Jz> >= 0  for all y in C.
/// `extra_points` (known solutions) join the certificate's sample set.
InnerSolution eq_resolvent(const Bifunction& f, double r, const Point& x, const FeasibleSet& set,
                           const SolverSettings& settings, const std::vector<Point>& extra_points = {});

/// Resolvent of the variational inequality: u in C with
///   <y - u, A u> + (1/r) <y - u, Ju - Jx> >= 0  for all y in C.
InnerSolution vi_resolvent(const MonotoneOperator& a, double r, const Point& x, const FeasibleSet& set,
                           const SolverSettings& settings, const std::vector<Point>& extra_points = {});

/// Generic (non-closed-form) VI path; exposed so tests can compare it against closed forms.
InnerSolution vi_resolvent_iterative(const MonotoneOperator& a, double r, const Point& x, const FeasibleSet& set,
                                     const SolverSettings& settings, const std::vector<Point>& extra_points = {});

/// Generic EP path for operator-form bifunctions.
InnerSolution eq_resolvent_iterative(const Bifunction& f, double r, const Point& x, const FeasibleSet& set,
                                     const SolverSettings& settings, const std::vector<Point>& extra_points = {});

enum class RetractionPath {
    Auto,       // exact active-set projection when J is linear, dual Newton otherwise
    Dykstra,    // alternating projections (J must be the identity)
    DualNewton  // variable-metric projected Newton on phi(x, .)
};

/// Sunny generalized nonexpansive retraction of x onto base ∩ ledger,
/// certified by <x - Rx, Jy - JRx> <= tol at sampled feasible y.
InnerSolution sunny_retraction(const Point& x, const FeasibleSet& base, const std::vector<HalfSpace>& ledger,
                               const SolverSettings& settings, const std::vector<Point>& extra_points = {},
                               RetractionPath path = RetractionPath::Auto);

/// {z : phi(z, y) <= phi(z, x)} written as 2 <z, Jx - Jy> <= |x|^2 - |y|^2.
HalfSpace halfspace_from_iterates(const Point& x, const Point& y, int provenance = 0);

// Certificate evaluators (also used by the property tests).
Certificate eq_certificate(const Bifunction& f, double r, const Point& x, const Point& z,
                           const std::vector<Point>& samples, double tol);
Certificate vi_certificate(const MonotoneOperator& a, double r, const Point& x, const Point& u,
                           const std::vector<Point>& samples, double tol);
Certificate retraction_certificate(const Point& x, const Point& rx, const std::vector<Point>& samples, double tol);

/// Certificate sample set: random feasible points around `center`, extra
/// points and x when feasible, and the ball's axis boundary points.
std::vector<Point> certificate_points(const FeasibleSet& set, const Point& center, const Point& x,
                                      const std::vector<Point>& extra_points, const SolverSettings& settings);

}  // namespace hybridfp
