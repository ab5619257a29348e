#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <stdexcept>
#include <string>

namespace hybridfp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Geometry { Hilbert, Lp };

/// Finite-dimensional space descriptor: R^dim with either the Euclidean norm
/// or the l_p norm, 1 < p < inf. Owns the duality map J, its inverse J* and
/// the Lyapunov functionals built on them.
class SpaceDescriptor {
public:
    static SpaceDescriptor hilbert(int dim);
    static SpaceDescriptor lp(int dim, double p);

    int dim() const { return dim_; }
    Geometry geometry() const { return geometry_; }
    double p() const { return p_; }
    double q() const { return q_; }

    /// True when J is the identity (Hilbert, or l_p with p == 2).
    bool euclidean() const { return euclidean_; }

    /// The space E* viewed as a primal space (l_q for l_p, itself for Hilbert).
    SpaceDescriptor dual() const;

    std::string describe() const;

    bool operator==(const SpaceDescriptor& other) const;

    // Coordinate-level kernels. Callers are responsible for matching sizes.
    double primal_norm(const Vector& x) const;
    double dual_norm(const Vector& w) const;
    Vector duality(const Vector& x) const;
    Vector inverse_duality(const Vector& w) const;

    /// Hessian of 1/2 ||z||^2 at z. Entries |z_i|^{p-2} are floored at
    /// `floor * ||z||` so the result stays finite and positive definite.
    Matrix duality_jacobian(const Vector& z, double floor = 1e-12) const;

private:
    SpaceDescriptor(int dim, Geometry g, double p);

    int dim_ = 1;
    Geometry geometry_ = Geometry::Hilbert;
    double p_ = 2.0;
    double q_ = 2.0;
    bool euclidean_ = true;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Element of E.
class Point {
public:
    Point(SpaceDescriptor space, Vector coords);
    Point(SpaceDescriptor space, std::initializer_list<double> coords);
    static Point zero(const SpaceDescriptor& space);

    const SpaceDescriptor& space() const { return space_; }
    const Vector& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }
    int dim() const { return static_cast<int>(coords_.size()); }

    Point operator+(const Point& o) const;
    Point operator-(const Point& o) const;
    Point operator*(double s) const;
    friend Point operator*(double s, const Point& x) { return x * s; }

private:
    SpaceDescriptor space_;
    Vector coords_;
};

/// Element of E*.
class DualPoint {
public:
    DualPoint(SpaceDescriptor space, Vector coords);
    DualPoint(SpaceDescriptor space, std::initializer_list<double> coords);
    static DualPoint zero(const SpaceDescriptor& space);

    const SpaceDescriptor& space() const { return space_; }
    const Vector& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }
    int dim() const { return static_cast<int>(coords_.size()); }

    DualPoint operator+(const DualPoint& o) const;
    DualPoint operator-(const DualPoint& o) const;
    DualPoint operator*(double s) const;
    friend DualPoint operator*(double s, const DualPoint& w) { return w * s; }

    /// Reinterpret as a point of the space E* (so E* algorithms can be reused).
    Point as_dual_space_point() const;

private:
    SpaceDescriptor space_;
    Vector coords_;
};

/// Reinterpret a point of E* (built with SpaceDescriptor::dual()) as a DualPoint of `primal`.
DualPoint as_dual_of(const SpaceDescriptor& primal, const Point& dual_space_point);

double norm(const Point& x);
double dual_norm(const DualPoint& w);
double pair(const Point& x, const DualPoint& w);
DualPoint duality_map(const Point& x);
Point inverse_duality_map(const DualPoint& w);

/// phi(x, y) = ||x||^2 - 2 <x, Jy> + ||y||^2.
double lyapunov(const Point& x, const Point& y);

/// phi*(w, w') = ||w||^2 - 2 <J* w', w> + ||w'||^2 on E*.
double dual_lyapunov(const DualPoint& w, const DualPoint& w2);

void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b, const char* what);

}  // namespace hybridfp
