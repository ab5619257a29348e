#pragma once

#include "hybridfp/feasible_set.hpp"

namespace hybridfp {

struct NewtonControl {
    double tol = 1e-12;  // max-norm step, relative to max(1, |z|_inf)
    int max_iters = 500;
};

struct BregmanSolve {
    Vector point;
    int iterations = 0;
    bool converged = true;
};

/// argmin_{z in set} phi(x, z): the sunny generalized nonexpansive retraction
/// of x onto `set` computed by variable-metric projected Newton in primal
/// coordinates (Euclidean projection when J is the identity, unless
/// `force_newton` asks for the Newton path anyway).
BregmanSolve lyapunov_retraction(const SpaceDescriptor& space, const Vector& x, const FeasibleSet& set,
                                 const NewtonControl& control, bool force_newton = false);

/// argmin_{y in set} ||y||^2 - 2 <y, xi>: the generalized projection of J* xi.
BregmanSolve generalized_projection(const SpaceDescriptor& space, const Vector& xi, const FeasibleSet& set,
                                    const NewtonControl& control);

}  // namespace hybridfp
