#include "convwalk/modular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "convwalk/error.hpp"

namespace convwalk::psl2 {

double wrap(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

double ccw(double from, double to) { return wrap(to - from); }

double angular_distance(double x, double y) {
    const double d = ccw(x, y);
    return std::min(d, kTwoPi - d);
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(Int p, Int q, Int r, Int s) : p_(std::move(p)), q_(std::move(q)), r_(std::move(r)), s_(std::move(s)) {
    require(p_ * s_ - q_ * r_ == 1, "matrix determinant must be 1");
    normalize();
}

void Matrix::normalize() {
    const Int* first = !p_.is_zero() ? &p_ : !q_.is_zero() ? &q_ : !r_.is_zero() ? &r_ : &s_;
    if (*first < 0) {
        p_ = -p_;
        q_ = -q_;
        r_ = -r_;
        s_ = -s_;
    }
}

Matrix Matrix::named(char name) {
    switch (name) {
    case 'S': return Matrix(0, -1, 1, 0);
    case 'T': return Matrix(1, 1, 0, 1);
    case 't': return Matrix(1, -1, 0, 1);
    case 'L': return Matrix(1, 0, 1, 1);
    case 'l': return Matrix(1, 0, -1, 1);
    case 'H': return Matrix(2, 1, 1, 1);
    case 'h': return Matrix(1, -1, -1, 2);
    }
    fail(ErrorCode::invalid_argument, std::string("unknown PSL(2,Z) generator '") + name + "'");
}

Matrix Matrix::parse(std::string_view text) {
    if (text.empty() || text == "e") return Matrix();
    if (text.front() == '[') {
        require(text.back() == ']', "matrix literal must be [p,q,r,s]");
        std::string body(text.substr(1, text.size() - 2));
        std::replace(body.begin(), body.end(), ',', ' ');
        std::istringstream in(body);
        std::string tok;
        std::vector<Int> v;
        while (in >> tok) {
            try {
                v.emplace_back(tok);
            } catch (const std::exception&) {
                fail(ErrorCode::invalid_argument, "bad matrix entry: " + tok);
            }
        }
        require(v.size() == 4, "matrix literal must have four entries");
        return Matrix(v[0], v[1], v[2], v[3]);
    }
    Matrix m;
    for (char c : text) m = m * named(c);
    return m;
}

Matrix Matrix::pow(long long n) const {
    Matrix base = n < 0 ? inverse() : *this;
    unsigned long long k = n < 0 ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
    Matrix out;
    while (k) {
        if (k & 1) out = out * base;
        base = base * base;
        k >>= 1;
    }
    return out;
}

Int Matrix::trace_abs() const {
    Int t = p_ + s_;
    return t < 0 ? Int(-t) : t;
}

Matrix operator*(const Matrix& x, const Matrix& y) {
    Matrix m;
    m.p_ = x.p_ * y.p_ + x.q_ * y.r_;
    m.q_ = x.p_ * y.q_ + x.q_ * y.s_;
    m.r_ = x.r_ * y.p_ + x.s_ * y.r_;
    m.s_ = x.r_ * y.q_ + x.s_ * y.s_;
    m.normalize();
    return m;
}

bool operator<(const Matrix& x, const Matrix& y) {
    if (x.p_ != y.p_) return x.p_ < y.p_;
    if (x.q_ != y.q_) return x.q_ < y.q_;
    if (x.r_ != y.r_) return x.r_ < y.r_;
    return x.s_ < y.s_;
}

std::string Matrix::to_string() const {
    std::ostringstream os;
    os << "[" << p_ << "," << q_ << "," << r_ << "," << s_ << "]";
    return os.str();
}

// ---------------------------------------------------------------- Point

Point::Point(double x, double y) {
    const double n = std::hypot(x, y);
    require(n > 0 && std::isfinite(n), "projective point must be a finite nonzero vector");
    x /= n;
    y /= n;
    if (y < 0 || (y == 0 && x < 0)) {
        x = -x;
        y = -y;
    }
    x_ = x;
    y_ = y;
}

Point Point::from_angle(double theta) {
    const double half = wrap(theta) / 2.0;
    return Point(std::cos(half), std::sin(half));
}

double Point::angle() const { return wrap(2.0 * std::atan2(y_, x_)); }

namespace {

double scaled(const Int& v, unsigned shift) {
    if (shift == 0) return v.convert_to<double>();
    Int w = v < 0 ? Int(-v) : v;
    w >>= shift;
    const double d = w.convert_to<double>();
    return v < 0 ? -d : d;
}

}  // namespace

Point Point::act(const Matrix& g) const {
    unsigned msb = 0;
    for (const Int* e : {&g.p(), &g.q(), &g.r(), &g.s()})
        if (!e->is_zero()) msb = std::max<unsigned>(msb, boost::multiprecision::msb(*e < 0 ? Int(-*e) : *e));
    const unsigned shift = msb > 900 ? msb - 900 : 0;
    const double p = scaled(g.p(), shift), q = scaled(g.q(), shift);
    const double r = scaled(g.r(), shift), s = scaled(g.s(), shift);
    return Point(p * x_ + q * y_, r * x_ + s * y_);
}

std::string Point::to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x_ << ":" << y_ << ")";
    return os.str();
}

// ---------------------------------------------------------------- arcs

ArcUnion ArcUnion::of(std::vector<Arc> arcs) {
    for (auto& a : arcs) {
        require(a.length >= 0 && a.length < kTwoPi - kAngleTol, "arc must be a proper closed arc");
        a.start = wrap(a.start);
    }
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.start < y.start; });

    // merge in the unrolled line, then across the 0 = 2pi seam
    std::vector<std::pair<double, double>> iv;
    for (const auto& a : arcs) {
        const double s = a.start, e = a.start + a.length;
        if (!iv.empty() && s <= iv.back().second + kAngleTol)
            iv.back().second = std::max(iv.back().second, e);
        else
            iv.emplace_back(s, e);
    }
    while (iv.size() > 1 && iv.back().second >= iv.front().first + kTwoPi - kAngleTol) {
        const double s = iv.back().first;
        const double e = std::max(iv.back().second, iv.front().second + kTwoPi);
        iv.pop_back();
        iv.front() = {s, e};
        std::rotate(iv.begin(), iv.begin() + 1, iv.end());
    }
    ArcUnion u;
    for (const auto& [s, e] : iv) {
        require(e - s < kTwoPi - kAngleTol, "arc union covers the whole circle");
        u.arcs_.push_back(Arc{wrap(s), e - s});
    }
    std::sort(u.arcs_.begin(), u.arcs_.end(), [](const Arc& x, const Arc& y) { return x.start < y.start; });
    return u;
}

ArcUnion ArcUnion::ball(double centre, double radius) { return of({Arc{centre - radius, 2.0 * radius}}); }

bool ArcUnion::contains(double theta) const {
    return std::any_of(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.contains(theta); });
}

bool ArcUnion::contains_interior(double theta) const {
    return std::any_of(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.contains_interior(theta); });
}

ArcUnion ArcUnion::image(const Matrix& g) const {
    std::vector<Arc> out;
    out.reserve(arcs_.size());
    for (const auto& a : arcs_) {
        const double s = Point::from_angle(a.start).act(g).angle();
        const double e = Point::from_angle(a.start + a.length).act(g).angle();
        out.push_back(Arc{s, ccw(s, e)});
    }
    return of(std::move(out));
}

bool ArcUnion::same_as(const ArcUnion& other) const {
    if (arcs_.size() != other.arcs_.size()) return false;
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        if (angular_distance(arcs_[i].start, other.arcs_[i].start) > kAngleTol) return false;
        if (std::abs(arcs_[i].length - other.arcs_[i].length) > kAngleTol) return false;
    }
    return true;
}

std::string ArcUnion::to_string() const {
    std::ostringstream os;
    os.precision(12);
    os << "{";
    for (std::size_t i = 0; i < arcs_.size(); ++i) os << (i ? "," : "") << "[" << arcs_[i].start << "+" << arcs_[i].length << "]";
    os << "}";
    return os.str();
}

bool interiors_cover_circle(const std::vector<Arc>& arcs) {
    if (arcs.empty()) return false;
    auto interior = [&](double theta) {
        return std::any_of(arcs.begin(), arcs.end(), [&](const Arc& a) { return a.contains_interior(theta); });
    };
    // Any gap in a union of open arcs is bounded by arc endpoints.
    for (const auto& a : arcs)
        if (!interior(a.start) || !interior(a.end())) return false;
    return true;
}

std::pair<Point, Point> hyperbolic_fixed_points(const Matrix& g) {
    require(g.is_hyperbolic(), "matrix is not hyperbolic");
    double p = g.p().convert_to<double>(), q = g.q().convert_to<double>();
    double r = g.r().convert_to<double>(), s = g.s().convert_to<double>();
    if (p + s < 0) {
        p = -p;
        q = -q;
        r = -r;
        s = -s;
    }
    const double tr = p + s;
    const double disc = std::sqrt(tr * tr - 4.0);
    const double big = (tr + disc) / 2.0, small = (tr - disc) / 2.0;
    auto eigen = [&](double lambda) {
        if (q != 0) return Point(q, lambda - p);
        return Point(lambda - s, r);
    };
    return {eigen(big), eigen(small)};
}

}  // namespace convwalk::psl2
