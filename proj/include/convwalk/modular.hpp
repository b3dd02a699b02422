#pragma once

// PSL(2,Z) acting on the boundary circle of the hyperbolic plane.
//
// A projective point (x:y) corresponds to the real number x/y (or infinity
// when y = 0) and to the circle angle 2*atan2(y, x) in [0, 2pi). Matrices of
// determinant 1 act by (x:y) -> (px+qy : rx+sy), which is an orientation
// preserving homeomorphism of that circle.

#include <boost/multiprecision/cpp_int.hpp>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace convwalk::psl2 {

using Int = boost::multiprecision::cpp_int;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Tolerance for point identity and arc comparisons on the circle.
inline constexpr double kAngleTol = 1e-9;

/// Reduces an angle into [0, 2pi).
double wrap(double theta);
/// Counterclockwise distance from `from` to `to`, in [0, 2pi).
double ccw(double from, double to);
/// Shortest angular distance, in [0, pi].
double angular_distance(double x, double y);

/// An element of PSL(2,Z), normalized so the first nonzero entry is positive.
class Matrix {
public:
    Matrix() : p_(1), q_(0), r_(0), s_(1) {}
    Matrix(Int p, Int q, Int r, Int s);

    /// Named generators: S, T, t = T^-1, L, l = L^-1, H, h = H^-1.
    static Matrix named(char name);
    /// "e", a word over the named generators ("TS", "Hh"), or "[p,q,r,s]".
    static Matrix parse(std::string_view text);

    const Int& p() const noexcept { return p_; }
    const Int& q() const noexcept { return q_; }
    const Int& r() const noexcept { return r_; }
    const Int& s() const noexcept { return s_; }

    bool is_identity() const { return p_ == 1 && q_ == 0 && r_ == 0 && s_ == 1; }
    Matrix inverse() const { return Matrix(s_, -q_, -r_, p_); }
    Matrix pow(long long n) const;
    Int trace_abs() const;
    bool is_hyperbolic() const { return trace_abs() > 2; }

    friend Matrix operator*(const Matrix& x, const Matrix& y);

    std::string to_string() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;
    friend bool operator<(const Matrix& x, const Matrix& y);

private:
    void normalize();
    Int p_, q_, r_, s_;
};

/// A point of the real projective line, stored as a unit vector with
/// y > 0, or y = 0 and x > 0.
class Point {
public:
    Point() : x_(1.0), y_(0.0) {}
    Point(double x, double y);

    static Point from_angle(double theta);
    static Point from_rational(long long num, long long den) { return Point(double(num), double(den)); }
    static Point from_real(double t) { return Point(t, 1.0); }
    static Point infinity() { return Point(1.0, 0.0); }

    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }
    double angle() const;

    Point act(const Matrix& g) const;

    /// Identity up to kAngleTol in angle.
    bool same_as(const Point& other) const { return angular_distance(angle(), other.angle()) <= kAngleTol; }

    std::string to_string() const;

private:
    double x_, y_;
};

/// A closed arc running counterclockwise from `start` for `length` radians.
struct Arc {
    double start = 0.0;
    double length = 0.0;

    double end() const { return wrap(start + length); }
    /// Closed membership with tolerance.
    bool contains(double theta) const { return ccw(start, theta) <= length + kAngleTol || ccw(theta, start) <= kAngleTol; }
    /// Open membership: strictly inside by more than the tolerance.
    bool contains_interior(double theta) const {
        const double d = ccw(start, theta);
        return d > kAngleTol && d < length - kAngleTol;
    }
    friend bool operator==(const Arc&, const Arc&) = default;
};

/// A finite union of pairwise disjoint closed arcs, sorted by start angle.
class ArcUnion {
public:
    ArcUnion() = default;
    static ArcUnion of(std::vector<Arc> arcs);
    /// Closed arc of the given radius around a centre angle.
    static ArcUnion ball(double centre, double radius);

    const std::vector<Arc>& arcs() const noexcept { return arcs_; }
    bool empty() const noexcept { return arcs_.empty(); }

    bool contains(double theta) const;
    bool contains_interior(double theta) const;
    bool contains(const Point& p) const { return contains(p.angle()); }
    bool contains_interior(const Point& p) const { return contains_interior(p.angle()); }

    ArcUnion image(const Matrix& g) const;

    /// Equality of normalized arc lists up to kAngleTol.
    bool same_as(const ArcUnion& other) const;

    std::string to_string() const;

private:
    std::vector<Arc> arcs_;
};

/// True iff the union of the interiors of the given arcs is the whole circle,
/// requiring every overlap to exceed kAngleTol.
bool interiors_cover_circle(const std::vector<Arc>& arcs);

/// Attracting and repelling fixed points of a hyperbolic matrix.
std::pair<Point, Point> hyperbolic_fixed_points(const Matrix& g);

}  // namespace convwalk::psl2
