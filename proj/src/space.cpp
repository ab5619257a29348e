#include "hybridfp/space.hpp"

#include <cmath>
#include <sstream>

namespace hybridfp {

namespace {

// ||x||_p computed with max-scaling so large or tiny entries do not overflow.
double scaled_pnorm(const Vector& x, double p) {
    const double m = x.cwiseAbs().maxCoeff();
    if (m == 0.0 || x.size() == 0) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / m, p);
    return m * std::pow(s, 1.0 / p);
}

// Gradient of 1/2 ||x||_p^2: w_i = ||x||^{2-p} |x_i|^{p-1} sign(x_i).
Vector pnorm_duality(const Vector& x, double p) {
    Vector w = Vector::Zero(x.size());
    const double n = scaled_pnorm(x, p);
    if (n == 0.0) return w;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        const double a = std::abs(x[i]) / n;
        w[i] = std::copysign(n * std::pow(a, p - 1.0), x[i]);
    }
    return w;
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
}

}  // namespace

SpaceDescriptor::SpaceDescriptor(int dim, Geometry g, double p) : dim_(dim), geometry_(g), p_(p) {
    if (dim < 1) throw std::invalid_argument("space dimension must be >= 1");
    if (g == Geometry::Lp) {
        if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("l_p exponent must lie in (1, inf)");
        q_ = p / (p - 1.0);
        euclidean_ = (p == 2.0);
    } else {
        p_ = 2.0;
        q_ = 2.0;
        euclidean_ = true;
    }
}

SpaceDescriptor SpaceDescriptor::hilbert(int dim) { return SpaceDescriptor(dim, Geometry::Hilbert, 2.0); }
SpaceDescriptor SpaceDescriptor::lp(int dim, double p) { return SpaceDescriptor(dim, Geometry::Lp, p); }

SpaceDescriptor SpaceDescriptor::dual() const {
    if (geometry_ == Geometry::Hilbert) return *this;
    return SpaceDescriptor(dim_, Geometry::Lp, q_);
}

std::string SpaceDescriptor::describe() const {
    std::ostringstream os;
    if (geometry_ == Geometry::Hilbert)
        os << "hilbert(d=" << dim_ << ")";
    else
        os << "lp(d=" << dim_ << ", p=" << p_ << ")";
    return os.str();
}

bool SpaceDescriptor::operator==(const SpaceDescriptor& o) const {
    return dim_ == o.dim_ && geometry_ == o.geometry_ && p_ == o.p_;
}

double SpaceDescriptor::primal_norm(const Vector& x) const {
    if (euclidean_) return x.norm();
    return scaled_pnorm(x, p_);
}

double SpaceDescriptor::dual_norm(const Vector& w) const {
    if (euclidean_) return w.norm();
    return scaled_pnorm(w, q_);
}

Vector SpaceDescriptor::duality(const Vector& x) const {
    if (euclidean_) return x;
    return pnorm_duality(x, p_);
}

Vector SpaceDescriptor::inverse_duality(const Vector& w) const {
    if (euclidean_) return w;
    return pnorm_duality(w, q_);
}

Matrix SpaceDescriptor::duality_jacobian(const Vector& z, double floor) const {
    const auto d = z.size();
    if (euclidean_) return Matrix::Identity(d, d);
    const double n = scaled_pnorm(z, p_);
    if (n == 0.0) return Matrix::Identity(d, d);
    // Degree-0 homogeneous form: with a_i = |z_i| / ||z||,
    // H = (p-1) diag(a^{p-2}) + (2-p) g g^T, g_i = sign(z_i) a_i^{p-1}.
    Vector diag(d), g(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double a = std::max(std::abs(z[i]) / n, floor);
        diag[i] = (p_ - 1.0) * std::pow(a, p_ - 2.0);
        g[i] = z[i] == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(z[i]) / n, p_ - 1.0), z[i]);
    }
    Matrix h = diag.asDiagonal();
    h.noalias() += (2.0 - p_) * g * g.transpose();
    return h;
}

void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b, const char* what) {
    if (!(a == b)) throw DimensionMismatch(std::string(what) + ": " + a.describe() + " vs " + b.describe());
}

// ---- Point / DualPoint ----

Point::Point(SpaceDescriptor space, Vector coords) : space_(space), coords_(std::move(coords)) {
    if (coords_.size() != space_.dim()) throw DimensionMismatch("point dimension does not match space");
    require_finite(coords_, "point");
}

Point::Point(SpaceDescriptor space, std::initializer_list<double> coords)
    : Point(space, Eigen::Map<const Vector>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

Point Point::zero(const SpaceDescriptor& space) { return Point(space, Vector::Zero(space.dim())); }

Point Point::operator+(const Point& o) const {
    require_same_space(space_, o.space_, "point addition");
    return Point(space_, coords_ + o.coords_);
}

Point Point::operator-(const Point& o) const {
    require_same_space(space_, o.space_, "point subtraction");
    return Point(space_, coords_ - o.coords_);
}

Point Point::operator*(double s) const { return Point(space_, coords_ * s); }

DualPoint::DualPoint(SpaceDescriptor space, Vector coords) : space_(space), coords_(std::move(coords)) {
    if (coords_.size() != space_.dim()) throw DimensionMismatch("dual point dimension does not match space");
    require_finite(coords_, "dual point");
}

DualPoint::DualPoint(SpaceDescriptor space, std::initializer_list<double> coords)
    : DualPoint(space, Eigen::Map<const Vector>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

DualPoint DualPoint::zero(const SpaceDescriptor& space) { return DualPoint(space, Vector::Zero(space.dim())); }

DualPoint DualPoint::operator+(const DualPoint& o) const {
    require_same_space(space_, o.space_, "dual point addition");
    return DualPoint(space_, coords_ + o.coords_);
}

DualPoint DualPoint::operator-(const DualPoint& o) const {
    require_same_space(space_, o.space_, "dual point subtraction");
    return DualPoint(space_, coords_ - o.coords_);
}

DualPoint DualPoint::operator*(double s) const { return DualPoint(space_, coords_ * s); }

Point DualPoint::as_dual_space_point() const { return Point(space_.dual(), coords_); }

DualPoint as_dual_of(const SpaceDescriptor& primal, const Point& dual_space_point) {
    require_same_space(primal.dual(), dual_space_point.space(), "dual-space reinterpretation");
    return DualPoint(primal, dual_space_point.coords());
}

// ---- operations ----

double norm(const Point& x) { return x.space().primal_norm(x.coords()); }

double dual_norm(const DualPoint& w) { return w.space().dual_norm(w.coords()); }

double pair(const Point& x, const DualPoint& w) {
    require_same_space(x.space(), w.space(), "pairing");
    return x.coords().dot(w.coords());
}

DualPoint duality_map(const Point& x) { return DualPoint(x.space(), x.space().duality(x.coords())); }

Point inverse_duality_map(const DualPoint& w) { return Point(w.space(), w.space().inverse_duality(w.coords())); }

double lyapunov(const Point& x, const Point& y) {
    require_same_space(x.space(), y.space(), "lyapunov");
    if (x.space().euclidean()) return (x.coords() - y.coords()).squaredNorm();
    const double nx = norm(x);
    const double ny = norm(y);
    const double v = nx * nx - 2.0 * x.coords().dot(x.space().duality(y.coords())) + ny * ny;
    return std::max(v, 0.0);
}

double dual_lyapunov(const DualPoint& w, const DualPoint& w2) {
    require_same_space(w.space(), w2.space(), "dual lyapunov");
    if (w.space().euclidean()) return (w.coords() - w2.coords()).squaredNorm();
    const double nw = dual_norm(w);
    const double nw2 = dual_norm(w2);
    const double v = nw * nw - 2.0 * w.coords().dot(w.space().inverse_duality(w2.coords())) + nw2 * nw2;
    return std::max(v, 0.0);
}

}  // namespace hybridfp
