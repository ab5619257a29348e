#pragma once

#include "hybridfp/feasible_set.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hybridfp {

/// Continuous monotone A : C -> E*.
struct MonotoneOperator {
    std::string name;
    std::function<DualPoint(const Point&)> evaluate;
    /// Unconstrained resolvent (x, r) -> z with A z + (Jz - Jx)/r = 0; used when z lands in C.
    std::function<Point(const Point&, double)> closed_form_resolvent;
};

/// Bifunction f : JC x JC -> R satisfying (A1)-(A4).
struct Bifunction {
    std::string name;
    std::function<double(const DualPoint&, const DualPoint&)> evaluate;
    /// Unconstrained resolvent (x, r) -> z; used when z lands in C.
    std::function<Point(const Point&, double)> closed_form_resolvent;
    /// When set, f(w, w') = <G(w), w' - w> with G : E* -> E, which lets the
    /// generic solver treat the resolvent as a variational inequality on E*.
    std::function<Point(const DualPoint&)> operator_form;
};

/// The family {T_n} : C -> E* together with its limit family Gamma.
struct MapFamily {
    std::string name;
    std::function<DualPoint(int, const Point&)> member;  // (n >= 1, x) -> T_n x
    std::vector<std::function<DualPoint(const Point&)>> limit_family;
    std::vector<Point> known_j_fixed_points;
    /// c with |Jx - T_n x|* >= c max_T |Jx - T x|* for every n (finite-sample NST proxy).
    std::optional<double> nst_constant;
};

struct ProblemInstance {
    std::string name;
    SpaceDescriptor space;
    FeasibleSet feasible_set;
    std::vector<MonotoneOperator> operators;
    std::vector<Bifunction> bifunctions;
    MapFamily maps;
    std::vector<Point> known_common_solutions;
};

class DegenerateFamily : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// ((n - 1) mod N) + 1.
int cyclic_operator_index(long n, int family_size);

using AlphaRule = std::function<double(int)>;

/// alpha_n = 1 / (n + 2).
AlphaRule default_alpha_rule();

// Catalog of parametric forms (shared with the config loader).

/// A x = scale * J x.
MonotoneOperator scaled_duality_operator(const SpaceDescriptor& space, double scale);
/// A x = M x + c in coordinates.
MonotoneOperator affine_operator(const SpaceDescriptor& space, Matrix m, Vector c);
/// f(w, w') = orientation * scale * <J* w, w' - w>; orientation = -1 gives the (A2)-violating sign.
Bifunction inverse_duality_bifunction(const SpaceDescriptor& space, double scale, double orientation = 1.0);
/// f(w, w') = <M J* w + c, w' - w>.
Bifunction affine_operator_bifunction(const SpaceDescriptor& space, Matrix m, Vector c);
/// T x = J(0, x_1, ..., x_{d-1}), T_n = alpha_n J + (1 - alpha_n) T.
MapFamily truncated_shift_family(const SpaceDescriptor& space, AlphaRule alpha_rule, int alpha_samples = 64);
/// T_n = T = J (every point is a J-fixed point).
MapFamily identity_family(const SpaceDescriptor& space);

/// The l_p example: unit ball, A = J, f(w,w') = <J* w, w' - w>, truncated
/// shift family. Known common solution: the origin.
ProblemInstance example_problem(double p, int dim, AlphaRule alpha_rule = default_alpha_rule());

/// Hilbert affine VI: A x = M x + c over `set`, no bifunctions, identity maps.
ProblemInstance hilbert_affine_vi_problem(const Matrix& m, const Vector& c, const FeasibleSet& set,
                                          std::vector<Point> known_solutions = {});

/// Random PSD M (rank dim-1) with c = 0 on ball(0, 10); seeded. With
/// `as_lp2` the same data lives in l_2 built through the l_p code path.
ProblemInstance hilbert_affine_vi_problem(int dim, std::uint64_t seed, bool as_lp2 = false);

struct PropertyCheck {
    std::string name;
    bool passed = true;
    double worst_slack = 0.0;  // largest observed violation (<= tolerance passes)
    double tolerance = 0.0;
    int samples = 0;
};

struct VerificationReport {
    std::vector<PropertyCheck> checks;
    bool all_passed() const;
    const PropertyCheck* find(const std::string& name) const;
};

/// Sampled checks of the instance's structural assumptions. Deterministic in rng_seed.
VerificationReport verify_problem(const ProblemInstance& instance, int samples, std::uint64_t rng_seed);

}  // namespace hybridfp
