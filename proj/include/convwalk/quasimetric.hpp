#pragma once

// The crossratio quasimetric rho on triples, Gromov products, defect
// estimates, displacement profiles and the finite-boundary indicators.
// Every value is computed at the truncation of the AnnulusSystem passed in.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "convwalk/annuli.hpp"
#include "convwalk/triple_space.hpp"

namespace convwalk {

using Rational = boost::rational<long long>;

struct QuasiDistance {
    int value = 0;
    std::size_t ball_radius = 0;
};

/// max over i != j, k != l of (x^i, x^j | y^k, y^l).
QuasiDistance rho(const Triple& x, const Triple& y, const AnnulusSystem& sys);

/// (x . y)_p = (rho(p,x) + rho(p,y) - rho(x,y)) / 2, not clamped.
Rational gromov_product(const Triple& x, const Triple& y, const Triple& p, const AnnulusSystem& sys);
Rational gromov_product(int rho_px, int rho_py, int rho_xy);

struct HyperbolicityEstimate {
    int triangle_defect = 0;  ///< max of rho(x,y) - rho(x,z) - rho(z,y), floored at 0
    Rational delta{0};        ///< max of min((x.z)_p, (y.z)_p) - (x.y)_p, floored at 0
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

struct HyperbolicityOptions {
    std::size_t max_word_length = 6;
    int workers = 1;
};

/// Each sample is a quadruple of orbit points g x0 of the default basepoint,
/// with g a random element of length uniform in [0, max_word_length]; all
/// labellings of the quadruple are scored. One substream per sample, reduced
/// in sample order, so the result does not depend on `workers`.
HyperbolicityEstimate estimate_hyperbolicity(std::size_t samples, const AnnulusSystem& sys, std::uint64_t seed,
                                             const HyperbolicityOptions& opt = {});

/// Same defects over a fixed list of triples: every ordered triple and
/// quadruple of list entries.
HyperbolicityEstimate hyperbolicity_of(const std::vector<Triple>& triples, const AnnulusSystem& sys);

enum class ElementType { loxodromic, parabolic, elliptic };
std::string element_type_name(ElementType t);
/// Throws for the identity.
ElementType classify_element(const GroupElement& g);

struct DisplacementProfile {
    ElementType type = ElementType::loxodromic;
    std::vector<std::pair<int, int>> points;  ///< (n, rho(x, g^n x)), n = 0..n_max
};

/// Non-loxodromic elements are flagged in `type`; the profile is still filled.
DisplacementProfile loxodromic_displacement(const GroupElement& g, const Triple& x, int n_max, const AnnulusSystem& sys);

/// Largest M with rho(x, g^(nN) x) >= n M for every n >= 1 inside the
/// profile (N = period).
double linear_lower_bound(const DisplacementProfile& profile, int period = 1);

struct LinearFit {
    int period = 0;  ///< 0 if no period gives a positive slope
    double slope = 0.0;
};

/// Smallest period N <= max_period with a positive linear_lower_bound.
LinearFit fit_linear_lower_bound(const DisplacementProfile& profile, int max_period = 4);

struct RadiusValue {
    std::size_t radius = 0;
    int value = 0;
};

/// (a, b | {p}) in each of the given systems (one per truncation radius).
std::vector<RadiusValue> pair_crossratio_to_point(const BoundaryPoint& a, const BoundaryPoint& b, const BoundaryPoint& p,
                                                  const std::vector<AnnulusSystem>& systems);
std::vector<RadiusValue> pair_crossratio_to_point(const BoundaryPoint& a, const BoundaryPoint& b, const BoundaryPoint& p,
                                                  const ModelSpec& spec, const Annulus& generator,
                                                  const std::vector<std::size_t>& radii);

struct BoundaryBallIndicator {
    BoundaryBallIndicator(Triple c, int r);
    Triple center;
    int radius;
};

/// All three (x^i, x^j | {p}) <= R: necessary for p in D_M(x, R).
bool in_boundary_ball_necessary(const BoundaryPoint& p, const BoundaryBallIndicator& ind, const AnnulusSystem& sys);

// ---------------------------------------------------------------- lemma surrogates (F2)

/// Up to `count` distinct ends inside C(u): u t (s) for successive letters.
std::vector<BoundaryPoint> cylinder_sample(const std::string& u, std::size_t count);

/// Nonempty reduced words of length <= max_depth, by length then letter order.
std::vector<std::string> cylinder_family(std::size_t max_depth);

/// (x_n, y_n | z_n, t_n) for each n.
std::vector<int> crossratio_sequence(const std::vector<BoundaryPoint>& xs, const std::vector<BoundaryPoint>& ys,
                                     const std::vector<BoundaryPoint>& zs, const std::vector<BoundaryPoint>& ts,
                                     const AnnulusSystem& sys);

struct LemmaConstant {
    int value = 0;
    std::size_t configurations = 0;
};

/// Smallest M with (x,y|a,c) <= (x,y|b,c) + M over I = C(u) for u in the
/// family, x,y,a sampled in I and b,c outside it.
LemmaConstant changing_points_constant(const AnnulusSystem& sys, std::size_t max_depth, std::size_t per_cylinder = 3);

/// Smallest K >= 0 with (w,x|y,z) >= (w,x|b,c) + (a,b|y,z) - K over disjoint
/// I = C(u), I' = C(v) from the family, a,w,x in I, c,y,z in I', b outside.
LemmaConstant gromov_bound_constant(const AnnulusSystem& sys, std::size_t max_depth, std::size_t per_cylinder = 3);

}  // namespace convwalk
