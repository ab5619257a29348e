#include "hybridfp/projection.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hybridfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NormalizedRows {
    Matrix a;  // unit-norm rows
    Vector b;
};

NormalizedRows normalize(const LinearRows& rows, double scale) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < rows.rows(); ++k) {
        const double n = rows.a.row(k).norm();
        if (n > 1e-300) {
            keep.push_back(k);
        } else if (rows.b[k] < -1e-12 * scale) {
            throw InfeasibleRegion("constraint 0 <= b with b < 0");
        }
    }
    NormalizedRows out{Matrix(static_cast<Eigen::Index>(keep.size()), rows.a.cols()),
                       Vector(static_cast<Eigen::Index>(keep.size()))};
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const auto k = keep[i];
        const double n = rows.a.row(k).norm();
        out.a.row(static_cast<Eigen::Index>(i)) = rows.a.row(k) / n;
        out.b[static_cast<Eigen::Index>(i)] = rows.b[k] / n;
    }
    return out;
}

Matrix active_normals(const NormalizedRows& rows, const std::vector<Eigen::Index>& active) {
    Matrix n(rows.a.cols(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) n.col(static_cast<Eigen::Index>(j)) = rows.a.row(active[j]).transpose();
    return n;
}

// Solve min 1/2|z - a|^2 s.t. the given (normalized) active constraints hold
// with equality; returns the multipliers.
Vector equality_multipliers(const Vector& a, const NormalizedRows& rows, const std::vector<Eigen::Index>& active) {
    if (active.empty()) return Vector();
    const Matrix n = active_normals(rows, active);
    Vector rhs(static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) rhs[static_cast<Eigen::Index>(j)] = rows.b[active[j]];
    // (N^T N) lambda = N^T a - b_A
    const Matrix gram = n.transpose() * n;
    return gram.ldlt().solve(n.transpose() * a - rhs);
}

}  // namespace

Vector project_onto_polyhedron(const Vector& a, const LinearRows& raw) {
    if (raw.rows() == 0) return a;
    const double scale = 1.0 + a.cwiseAbs().maxCoeff();
    const NormalizedRows rows = normalize(raw, scale);
    const Eigen::Index m = rows.a.rows();
    const Eigen::Index d = a.size();
    if (m == 0) return a;

    auto tolerance = [&](Eigen::Index k, const Vector& z) {
        return 1e-13 * (1.0 + std::abs(rows.b[k]) + z.cwiseAbs().maxCoeff());
    };

    Vector z = a;
    std::vector<Eigen::Index> active;
    Vector lambda;  // multipliers of `active`
    const long max_iter = 50 * (m + d) + 1000;
    long iter = 0;

    while (true) {
        // Most violated constraint.
        const Vector viol = rows.a * z - rows.b;
        Eigen::Index p = -1;
        double worst = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double excess = viol[k] - tolerance(k, z);
            if (excess > 0.0 && viol[k] > worst) {
                worst = viol[k];
                p = k;
            }
        }
        if (p < 0) break;

        double lambda_p = 0.0;
        const Vector np = rows.a.row(p).transpose();
        bool added = false;
        while (!added) {
            if (++iter > max_iter) throw InfeasibleRegion("active-set projection did not terminate");
            const auto q = static_cast<Eigen::Index>(active.size());
            Vector r = Vector::Zero(q);
            Vector dir = np;
            if (q > 0) {
                const Matrix n = active_normals(rows, active);
                Eigen::HouseholderQR<Matrix> qr(n);
                const Matrix qthin = qr.householderQ() * Matrix::Identity(d, q);
                const Matrix rtri = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
                r = rtri.triangularView<Eigen::Upper>().solve(qthin.transpose() * np);
                dir = np - n * r;
            }
            const double dn2 = dir.squaredNorm();
            const bool dependent = dn2 < 1e-24;
            const double slack = np.dot(z) - rows.b[p];
            const double t2 = dependent ? kInf : std::max(slack, 0.0) / dn2;

            double t1 = kInf;
            Eigen::Index drop = -1;
            for (Eigen::Index j = 0; j < q; ++j) {
                if (r[j] > 1e-14) {
                    const double t = lambda[j] / r[j];
                    if (t < t1) {
                        t1 = t;
                        drop = j;
                    }
                }
            }
            if (t1 == kInf && t2 == kInf) throw InfeasibleRegion("linear constraints are inconsistent");

            const double t = std::min(t1, t2);
            if (!dependent) z -= t * dir;
            if (q > 0) lambda -= t * r;
            lambda_p += t;

            if (t2 <= t1) {
                active.push_back(p);
                lambda.conservativeResize(q + 1);
                lambda[q] = lambda_p;
                added = true;
            } else {
                active.erase(active.begin() + drop);
                Vector rest(q - 1);
                for (Eigen::Index j = 0, k = 0; j < q; ++j)
                    if (j != drop) rest[k++] = lambda[j];
                lambda = rest;
            }
        }
    }

    // Polish: re-solve the equality-constrained problem on the final active set.
    if (!active.empty()) {
        const Vector mult = equality_multipliers(a, rows, active);
        if (mult.allFinite() && mult.minCoeff() >= -1e-10 * (1.0 + mult.cwiseAbs().maxCoeff())) {
            const Vector polished = a - active_normals(rows, active) * mult;
            const Vector viol = rows.a * polished - rows.b;
            if ((viol.array() <= 1e-11 * scale).all()) z = polished;
        }
    }
    return z;
}

Vector metric_step_onto_polyhedron(const Vector& z, const Vector& g, const Matrix& metric, const LinearRows& rows) {
    // With M = L L^T and v = L^T y the subproblem is a Euclidean projection of
    // L^T z - L^{-1} g onto {v : A L^{-T} v <= b}.
    Eigen::LLT<Matrix> llt(metric);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("metric is not positive definite");
    const Matrix l = llt.matrixL();
    const Vector target = l.transpose() * z - l.triangularView<Eigen::Lower>().solve(g);
    LinearRows transformed{Matrix(rows.a.rows(), rows.a.cols()), rows.b};
    if (rows.rows() > 0)
        transformed.a = l.triangularView<Eigen::Lower>().solve(rows.a.transpose()).transpose();
    const Vector v = project_onto_polyhedron(target, transformed);
    return l.transpose().triangularView<Eigen::Upper>().solve(v);
}

Vector euclidean_projection(const Vector& x, const FeasibleSet& set) {
    const LinearRows rows = set.linear_rows();
    const auto& ball = set.ball_part();
    if (!ball) return project_onto_polyhedron(x, rows);

    const Vector& c = ball->center.coords();
    const double rho = ball->radius;
    if (rows.rows() == 0) {
        const double dist = (x - c).norm();
        if (dist <= rho) return x;
        return c + (rho / dist) * (x - c);
    }
    const Vector first = project_onto_polyhedron(x, rows);
    if ((first - c).norm() <= rho) return first;
    const Vector inner = project_onto_polyhedron(c, rows);
    if ((inner - c).norm() > rho * (1.0 + 1e-12)) throw InfeasibleRegion("ball and linear constraints do not intersect");

    // Multiplier mu of the ball: z(t) = P_P((1 - t) x + t c), t = mu / (1 + mu).
    // |z(t) - c| is nonincreasing in t; find the crossing of rho.
    auto at = [&](double t) { return project_onto_polyhedron((1.0 - t) * x + t * c, rows); };
    auto gap = [&](double t) { return (at(t) - c).norm() - rho; };
    const double g_lo = (first - c).norm() - rho;
    const double g_hi = (inner - c).norm() - rho;
    if (g_hi >= 0.0) return inner;
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(gap, 0.0, 1.0, g_lo, g_hi,
                                                           boost::math::tools::eps_tolerance<double>(50), max_iter);
    // Upper end of the bracket is on the feasible side.
    Vector z = at(bracket.second);
    const double dist = (z - c).norm();
    if (dist > rho) z = c + (rho / dist) * (z - c);
    return z;
}

DykstraResult dykstra_projection(const Vector& x, const FeasibleSet& set, double tol, int max_sweeps) {
    const LinearRows rows = set.linear_rows();
    const auto& ball = set.ball_part();
    const Eigen::Index m = rows.rows();
    const Eigen::Index d = x.size();
    const Eigen::Index sets = m + (ball ? 1 : 0);

    Matrix corrections = Matrix::Zero(d, sets);
    Vector z = x;
    DykstraResult out{z, 0, false};
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const Vector before = z;
        const Matrix corrections_before = corrections;
        for (Eigen::Index i = 0; i < sets; ++i) {
            const Vector shifted = z + corrections.col(i);
            Vector projected;
            if (i < m) {
                const auto row = rows.a.row(i).transpose();
                const double n2 = row.squaredNorm();
                const double excess = row.dot(shifted) - rows.b[i];
                projected = (excess > 0.0 && n2 > 0.0) ? Vector(shifted - (excess / n2) * row) : shifted;
            } else {
                const Vector& c = ball->center.coords();
                const double dist = (shifted - c).norm();
                projected = dist <= ball->radius ? shifted : Vector(c + (ball->radius / dist) * (shifted - c));
            }
            corrections.col(i) = shifted - projected;
            z = projected;
        }
        out.sweeps = sweep + 1;
        // z alone can stall while corrections still move.
        if ((z - before).cwiseAbs().maxCoeff() <= tol &&
            (corrections - corrections_before).cwiseAbs().maxCoeff() <= tol) {
            out.converged = true;
            break;
        }
    }
    out.point = z;
    return out;
}

}  // namespace hybridfp
