#pragma once

#include "hybridfp/feasible_set.hpp"

#include <stdexcept>

namespace hybridfp {

class InfeasibleRegion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact Euclidean projection of `a` onto {z : rows.a z <= rows.b}, by the
/// dual active-set method of Goldfarb and Idnani specialised to the identity
/// Hessian. The final active set is re-solved in one shot so the result sits
/// on its active constraints to rounding.
Vector project_onto_polyhedron(const Vector& a, const LinearRows& rows);

/// argmin_y <g, y - z> + 1/2 (y - z)^T M (y - z) subject to rows; M must be
/// symmetric positive definite.
Vector metric_step_onto_polyhedron(const Vector& z, const Vector& g, const Matrix& metric, const LinearRows& rows);

/// Euclidean projection onto ball ∩ box ∩ half-spaces (ball norm is Euclidean,
/// so callers use this for Hilbert-type geometries or as a sampling aid).
Vector euclidean_projection(const Vector& x, const FeasibleSet& set);

struct DykstraResult {
    Vector point;
    int sweeps = 0;
    bool converged = false;
};

/// Dykstra's alternating projections over the ball and every linear row.
/// Stops when neither the iterate nor any correction moves by more than tol
/// (max norm) over a full sweep.
DykstraResult dykstra_projection(const Vector& x, const FeasibleSet& set, double tol, int max_sweeps);

}  // namespace hybridfp
