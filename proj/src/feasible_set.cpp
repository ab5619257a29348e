#include "hybridfp/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridfp {

double HalfSpace::violation(const Point& z) const { return 2.0 * pair(z, normal) - offset; }

FeasibleSet FeasibleSet::ball(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball radius must be positive");
    const auto& sp = center.space();
    if (!sp.euclidean() && center.coords().cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("l_p balls (p != 2) must be centred at the origin");
    FeasibleSet s(sp);
    s.ball_ = Ball{std::move(center), radius};
    return s;
}

FeasibleSet FeasibleSet::box(SpaceDescriptor space, Vector lower, Vector upper) {
    if (lower.size() != space.dim() || upper.size() != space.dim()) throw DimensionMismatch("box bounds dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i])
            throw std::invalid_argument("box bounds must satisfy lower <= upper");
    }
    FeasibleSet s(space);
    s.box_ = Box{std::move(lower), std::move(upper)};
    return s;
}

FeasibleSet FeasibleSet::whole_space(SpaceDescriptor space) { return FeasibleSet(space); }

FeasibleSet FeasibleSet::intersect(const std::vector<HalfSpace>& constraints) const {
    FeasibleSet s = *this;
    for (const auto& h : constraints) {
        require_same_space(space_, h.normal.space(), "half-space");
        s.halfspaces_.push_back(h);
    }
    return s;
}

double FeasibleSet::worst_violation(const Point& x) const {
    require_same_space(space_, x.space(), "membership test");
    double worst = -std::numeric_limits<double>::infinity();
    if (ball_) worst = std::max(worst, norm(x - ball_->center) - ball_->radius);
    if (box_) {
        worst = std::max(worst, (box_->lower - x.coords()).maxCoeff());
        worst = std::max(worst, (x.coords() - box_->upper).maxCoeff());
    }
    for (const auto& h : halfspaces_) worst = std::max(worst, h.violation(x));
    if (worst == -std::numeric_limits<double>::infinity()) worst = 0.0;
    return worst;
}

bool FeasibleSet::has_linear_part() const {
    if (!halfspaces_.empty()) return true;
    if (!box_) return false;
    return box_->lower.array().isFinite().any() || box_->upper.array().isFinite().any();
}

LinearRows FeasibleSet::linear_rows() const {
    const int d = space_.dim();
    std::vector<std::pair<Vector, double>> rows;
    if (box_) {
        for (int i = 0; i < d; ++i) {
            if (std::isfinite(box_->upper[i])) {
                Vector a = Vector::Zero(d);
                a[i] = 1.0;
                rows.emplace_back(a, box_->upper[i]);
            }
            if (std::isfinite(box_->lower[i])) {
                Vector a = Vector::Zero(d);
                a[i] = -1.0;
                rows.emplace_back(a, -box_->lower[i]);
            }
        }
    }
    for (const auto& h : halfspaces_) rows.emplace_back(2.0 * h.normal.coords(), h.offset);
    LinearRows out{Matrix(static_cast<Eigen::Index>(rows.size()), d), Vector(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.a.row(static_cast<Eigen::Index>(k)) = rows[k].first.transpose();
        out.b[static_cast<Eigen::Index>(k)] = rows[k].second;
    }
    return out;
}

double FeasibleSet::max_step(const Point& from, const Point& to) const {
    const Vector dir = to.coords() - from.coords();
    double t = 1.0;
    const LinearRows rows = linear_rows();
    for (Eigen::Index k = 0; k < rows.rows(); ++k) {
        const double slope = rows.a.row(k).dot(dir);
        if (slope <= 0.0) continue;
        const double slack = rows.b[k] - rows.a.row(k).dot(from.coords());
        t = std::min(t, std::max(slack, 0.0) / slope);
    }
    if (ball_) {
        const Vector base = from.coords() - ball_->center.coords();
        const double r = ball_->radius;
        auto outside = [&](double s) { return space_.primal_norm(base + s * dir) > r; };
        if (outside(t)) {
            if (space_.euclidean()) {
                // |base + s dir|^2 = r^2, larger root.
                const double aa = dir.squaredNorm();
                const double bb = base.dot(dir);
                const double cc = base.squaredNorm() - r * r;
                const double disc = std::max(bb * bb - aa * cc, 0.0);
                t = std::clamp((-bb + std::sqrt(disc)) / aa, 0.0, t);
            } else {
                double lo = 0.0, hi = t;
                for (int it = 0; it < 100 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (outside(mid) ? hi : lo) = mid;
                }
                t = lo;
            }
        }
    }
    return t;
}

double FeasibleSet::extent(const Point& around) const {
    if (ball_) return ball_->radius + norm(around - ball_->center);
    if (box_) {
        Vector span = (box_->upper - box_->lower);
        for (Eigen::Index i = 0; i < span.size(); ++i)
            if (!std::isfinite(span[i])) span[i] = 1.0 + std::abs(around[static_cast<int>(i)]);
        return std::max(span.norm(), 1e-3);
    }
    return std::max(1.0, norm(around));
}

std::vector<Point> FeasibleSet::sample(const Point& seed, int count, std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = 2.0 * extent(seed);
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) {
        Vector g(space_.dim());
        for (auto& v : g) v = gauss(rng);
        const double gn = g.norm();
        if (gn == 0.0) continue;
        const Point target(space_, seed.coords() + (scale / gn) * g);
        const double t = max_step(seed, target);
        const double frac = (k % 2 == 0) ? 1.0 : unit(rng);
        Point y(space_, seed.coords() + (t * frac) * (target.coords() - seed.coords()));
        out.push_back(std::move(y));
    }
    return out;
}

std::vector<Point> FeasibleSet::axis_boundary_points() const {
    std::vector<Point> out;
    if (!ball_) return out;
    const int d = space_.dim();
    for (int i = 0; i < d; ++i) {
        for (double sgn : {1.0, -1.0}) {
            Vector v = ball_->center.coords();
            v[i] += sgn * ball_->radius;
            Point y(space_, v);
            if (contains(y, 1e-12)) out.push_back(std::move(y));
        }
    }
    return out;
}

}  // namespace hybridfp
