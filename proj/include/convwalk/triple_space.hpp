#pragma once

// The space T of ordered distinct triples, with Tukia's topology on T u M:
// a boundary neighborhood U of p induces the set of triples having at least
// two components in U.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "convwalk/group_models.hpp"

namespace convwalk {

/// Finite-data reading of "eventually": every index at or past this
/// fraction of the sequence length.
inline constexpr double kEventualFraction = 0.8;

std::size_t eventual_start(std::size_t length);

class Triple {
public:
    Triple(BoundaryPoint p1, BoundaryPoint p2, BoundaryPoint p3);

    Model model() const noexcept { return pts_[0].model(); }
    const BoundaryPoint& operator[](std::size_t i) const { return pts_[i]; }
    const std::array<BoundaryPoint, 3>& points() const noexcept { return pts_; }

    /// True iff the three points are pairwise distinct (exactly for F2,
    /// by more than psl2::kAngleTol on the circle).
    static bool distinct(const BoundaryPoint& x, const BoundaryPoint& y, const BoundaryPoint& z);

    std::string to_string() const;

private:
    std::array<BoundaryPoint, 3> pts_;
};

Triple act_triple(const GroupElement& g, const Triple& x);

/// Basepoint used when none is given: (b^inf, B^inf, a^inf) for F2 and
/// (0, 1, inf) on the circle.
Triple default_basepoint(Model m);

/// Three independent random_boundary_point draws, redrawn until distinct.
Triple random_triple(Model m, RandomStream& rng, std::size_t max_prefix = 6);

/// An open boundary set: the interior of `base` (cylinder unions are clopen;
/// arc unions are read as open arcs).
class TukiaNeighborhood {
public:
    explicit TukiaNeighborhood(ClosedSet base) : base_(std::move(base)) {}

    const ClosedSet& base() const noexcept { return base_; }
    Model model() const noexcept { return base_.model(); }
    bool contains(const BoundaryPoint& p) const { return base_.contains_interior(p); }
    /// True iff this open set contains the other one.
    bool contains(const TukiaNeighborhood& inner) const;

    TukiaNeighborhood translate(const GroupElement& g) const { return TukiaNeighborhood(act_set(g, base_)); }

private:
    ClosedSet base_;
};

/// Nested basis at p: cylinders C(p_1..p_k) for F2, open arcs of half-width
/// pi / 2^k on the circle, for k = 1..levels.
std::vector<TukiaNeighborhood> neighborhood_basis(const BoundaryPoint& p, std::size_t levels);

std::size_t components_in(const Triple& x, const TukiaNeighborhood& u);
bool in_tukia_neighborhood(const Triple& x, const TukiaNeighborhood& u);

/// True iff for every neighborhood in the schedule, the sequence is
/// eventually (past kEventualFraction) inside its induced Tukia set.
/// Throws if the schedule is not nested or does not contain p.
bool triple_converges_to(const std::vector<Triple>& seq, const BoundaryPoint& p,
                         const std::vector<TukiaNeighborhood>& schedule);

/// Membership of g in the compactification neighborhood induced by U, read
/// through the orbit of the basepoint.
bool in_G_neighborhood(const GroupElement& g, const TukiaNeighborhood& u, const Triple& basepoint);

/// Same criterion as triple_converges_to, for the orbit (g_n x).
bool group_sequence_converges_to(const std::vector<GroupElement>& seq, const BoundaryPoint& p,
                                 const std::vector<TukiaNeighborhood>& schedule, const Triple& basepoint);

// ---------------------------------------------------------------- disk model

using DiskPoint = std::complex<double>;

/// Ideal point of the unit disk for a circle boundary point.
DiskPoint ideal_point(const BoundaryPoint& p);

/// Foot of the perpendicular from the ideal point x[2] onto the geodesic
/// joining x[0] and x[1], in the Poincare disk. Circle model only.
DiskPoint disk_projection(const Triple& x);

double hyperbolic_distance(DiskPoint z, DiskPoint w);

}  // namespace convwalk
