#pragma once

#include "hybridfp/space.hpp"

#include <optional>
#include <random>
#include <vector>

namespace hybridfp {

/// {z : 2 <z, normal> <= offset}, generated at outer iteration `provenance`.
struct HalfSpace {
    DualPoint normal;
    double offset = 0.0;
    int provenance = 0;

    /// 2 <z, normal> - offset; nonpositive inside.
    double violation(const Point& z) const;
    bool contains(const Point& z, double tol = 1e-12) const { return violation(z) <= tol; }
};

struct Ball {
    Point center;
    double radius;
};

struct Box {
    Vector lower;
    Vector upper;
};

/// Linear inequality rows a_i^T z <= b_i.
struct LinearRows {
    Matrix a;  // rows x dim
    Vector b;
    Eigen::Index rows() const { return a.rows(); }
};

/// Closed convex feasible set: an optional ball, an optional box and any
/// number of accumulated half-spaces, all intersected.
class FeasibleSet {
public:
    static FeasibleSet ball(Point center, double radius);
    static FeasibleSet box(SpaceDescriptor space, Vector lower, Vector upper);
    static FeasibleSet whole_space(SpaceDescriptor space);

    /// this ∩ every half-space in `constraints`.
    FeasibleSet intersect(const std::vector<HalfSpace>& constraints) const;

    const SpaceDescriptor& space() const { return space_; }
    const std::optional<Ball>& ball_part() const { return ball_; }
    const std::optional<Box>& box_part() const { return box_; }
    const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }

    /// Largest constraint violation at x (<= 0 means strictly feasible).
    double worst_violation(const Point& x) const;
    bool contains(const Point& x, double tol = 1e-12) const { return worst_violation(x) <= tol; }

    /// Box and half-space constraints as rows a^T z <= b (ball excluded).
    LinearRows linear_rows() const;
    bool has_linear_part() const;

    /// Largest t in [0, 1] with from + t (to - from) in the set; `from` must be feasible.
    double max_step(const Point& from, const Point& to) const;

    /// Deterministic feasible samples around a feasible seed: alternating
    /// boundary hits and interior points along random rays from `seed`.
    std::vector<Point> sample(const Point& seed, int count, std::mt19937_64& rng) const;

    /// center ± radius e_i for the ball part (filtered to members of the set).
    std::vector<Point> axis_boundary_points() const;

    /// Rough size of the set (used to scale random directions).
    double extent(const Point& around) const;

private:
    explicit FeasibleSet(SpaceDescriptor space) : space_(space) {}

    SpaceDescriptor space_;
    std::optional<Ball> ball_;
    std::optional<Box> box_;
    std::vector<HalfSpace> halfspaces_;
};

}  // namespace hybridfp
