#include "convwalk/triple_space.hpp"

#include <algorithm>
#include <cmath>

#include "convwalk/error.hpp"

namespace convwalk {

std::size_t eventual_start(std::size_t length) {
    return std::min(length == 0 ? 0 : length - 1, static_cast<std::size_t>(std::floor(kEventualFraction * double(length))));
}

// ---------------------------------------------------------------- Triple

bool Triple::distinct(const BoundaryPoint& x, const BoundaryPoint& y, const BoundaryPoint& z) {
    return !x.same_as(y) && !y.same_as(z) && !x.same_as(z);
}

Triple::Triple(BoundaryPoint p1, BoundaryPoint p2, BoundaryPoint p3) : pts_{std::move(p1), std::move(p2), std::move(p3)} {
    check_same_model(pts_[0].model(), pts_[1].model(), "triple");
    check_same_model(pts_[0].model(), pts_[2].model(), "triple");
    require(distinct(pts_[0], pts_[1], pts_[2]), "triple components must be pairwise distinct");
}

std::string Triple::to_string() const {
    return "(" + pts_[0].to_string() + ", " + pts_[1].to_string() + ", " + pts_[2].to_string() + ")";
}

Triple act_triple(const GroupElement& g, const Triple& x) { return Triple(act(g, x[0]), act(g, x[1]), act(g, x[2])); }

Triple default_basepoint(Model m) {
    if (m == Model::free_group)
        return Triple(BoundaryPoint::parse(m, "(b)"), BoundaryPoint::parse(m, "(B)"), BoundaryPoint::parse(m, "(a)"));
    return Triple(BoundaryPoint::parse(m, "0"), BoundaryPoint::parse(m, "1"), BoundaryPoint::parse(m, "inf"));
}

Triple random_triple(Model m, RandomStream& rng, std::size_t max_prefix) {
    for (;;) {
        auto x = random_boundary_point(m, rng, max_prefix);
        auto y = random_boundary_point(m, rng, max_prefix);
        auto z = random_boundary_point(m, rng, max_prefix);
        if (Triple::distinct(x, y, z)) return Triple(std::move(x), std::move(y), std::move(z));
    }
}

// ---------------------------------------------------------------- neighborhoods

bool TukiaNeighborhood::contains(const TukiaNeighborhood& inner) const {
    check_same_model(model(), inner.model(), "neighborhood inclusion");
    if (model() == Model::free_group) return base_.cylinders().contains(inner.base_.cylinders());
    for (const auto& b : inner.base_.arcs().arcs()) {
        bool inside = false;
        for (const auto& a : base_.arcs().arcs())
            if (a.contains(b.start) && psl2::ccw(a.start, b.start) + b.length <= a.length + psl2::kAngleTol) inside = true;
        if (!inside) return false;
    }
    return true;
}

std::vector<TukiaNeighborhood> neighborhood_basis(const BoundaryPoint& p, std::size_t levels) {
    std::vector<TukiaNeighborhood> out;
    out.reserve(levels);
    for (std::size_t k = 1; k <= levels; ++k) {
        if (p.model() == Model::free_group)
            out.emplace_back(ClosedSet::cylinder(p.end().head(k)));
        else
            out.emplace_back(ClosedSet::arc(p.point().angle(), std::numbers::pi / std::ldexp(1.0, int(k))));
    }
    return out;
}

std::size_t components_in(const Triple& x, const TukiaNeighborhood& u) {
    check_same_model(x.model(), u.model(), "tukia neighborhood");
    return std::size_t(u.contains(x[0])) + std::size_t(u.contains(x[1])) + std::size_t(u.contains(x[2]));
}

bool in_tukia_neighborhood(const Triple& x, const TukiaNeighborhood& u) { return components_in(x, u) >= 2; }

namespace {

void check_schedule(const BoundaryPoint& p, const std::vector<TukiaNeighborhood>& schedule) {
    require(!schedule.empty(), "neighborhood schedule is empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        require(schedule[k].contains(p), "schedule neighborhood does not contain the target point");
        if (k > 0) require(schedule[k - 1].contains(schedule[k]), "neighborhood schedule is not nested");
    }
}

}  // namespace

bool triple_converges_to(const std::vector<Triple>& seq, const BoundaryPoint& p,
                         const std::vector<TukiaNeighborhood>& schedule) {
    check_schedule(p, schedule);
    if (seq.empty()) return false;
    for (const auto& u : schedule)
        for (std::size_t n = eventual_start(seq.size()); n < seq.size(); ++n)
            if (!in_tukia_neighborhood(seq[n], u)) return false;
    return true;
}

bool in_G_neighborhood(const GroupElement& g, const TukiaNeighborhood& u, const Triple& basepoint) {
    return in_tukia_neighborhood(act_triple(g, basepoint), u);
}

bool group_sequence_converges_to(const std::vector<GroupElement>& seq, const BoundaryPoint& p,
                                 const std::vector<TukiaNeighborhood>& schedule, const Triple& basepoint) {
    check_schedule(p, schedule);
    if (seq.empty()) return false;
    for (std::size_t n = eventual_start(seq.size()); n < seq.size(); ++n) {
        // images may collide numerically on the circle, so count points directly
        std::array<BoundaryPoint, 3> img{act(seq[n], basepoint[0]), act(seq[n], basepoint[1]), act(seq[n], basepoint[2])};
        for (const auto& u : schedule) {
            const std::size_t inside = std::size_t(u.contains(img[0])) + u.contains(img[1]) + u.contains(img[2]);
            if (inside < 2) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- disk model

DiskPoint ideal_point(const BoundaryPoint& p) { return std::polar(1.0, p.point().angle()); }

DiskPoint disk_projection(const Triple& x) {
    if (x.model() != Model::modular) fail(ErrorCode::model_mismatch, "disk projection needs the circle model");
    const DiskPoint a = ideal_point(x[0]), b = ideal_point(x[1]), c = ideal_point(x[2]);
    // z -> (z-a)/(z-b) sends the geodesic [a,b] to the ray through 0
    // perpendicular to the image line of the circle.
    const DiskPoint c_img = (c - a) / (c - b);
    const DiskPoint centre_img = a / b;
    const double r = std::abs(c_img);
    DiskPoint u = DiskPoint(0, 1) * c_img / r;
    if (std::imag(std::conj(c_img) * centre_img) < 0) u = -u;
    const DiskPoint w = r * u;
    return (w * b - a) / (w - 1.0);
}

double hyperbolic_distance(DiskPoint z, DiskPoint w) {
    const double num = std::abs(z - w);
    const double den = std::abs(1.0 - std::conj(w) * z);
    return 2.0 * std::atanh(std::min(num / den, 1.0 - 1e-16));
}

}  // namespace convwalk
