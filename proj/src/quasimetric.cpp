#include "convwalk/quasimetric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "convwalk/error.hpp"
#include "convwalk/parallel.hpp"

namespace convwalk {

namespace {

constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

PointSet pair_of(const Triple& x, std::pair<int, int> ij) { return PointSet{x[ij.first], x[ij.second]}; }

}  // namespace

QuasiDistance rho(const Triple& x, const Triple& y, const AnnulusSystem& sys) {
    check_same_model(x.model(), y.model(), "rho");
    check_same_model(x.model(), sys.model(), "rho");
    int best = 0;
    for (auto ij : kPairs)
        for (auto kl : kPairs) best = std::max(best, sys.crossratio(pair_of(x, ij), pair_of(y, kl)));
    return QuasiDistance{best, sys.ball_radius()};
}

Rational gromov_product(int rho_px, int rho_py, int rho_xy) { return Rational(rho_px + rho_py - rho_xy, 2); }

Rational gromov_product(const Triple& x, const Triple& y, const Triple& p, const AnnulusSystem& sys) {
    return gromov_product(rho(p, x, sys).value, rho(p, y, sys).value, rho(x, y, sys).value);
}

// ---------------------------------------------------------------- hyperbolicity

namespace {

struct Defects {
    int triangle = 0;
    Rational delta{0};
};

// d[i][j] = rho between the four triples of a sample; every labelling of
// the quadruple is tried.
Defects quadruple_defects(const std::array<std::array<int, 4>, 4>& d) {
    Defects out;
    for (int p = 0; p < 4; ++p)
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                for (int z = 0; z < 4; ++z) {
                    if (x == y || y == z || x == z) continue;
                    out.triangle = std::max(out.triangle, d[x][y] - d[x][z] - d[z][y]);
                    if (p == x || p == y || p == z) continue;
                    const Rational xy = gromov_product(d[p][x], d[p][y], d[x][y]);
                    const Rational xz = gromov_product(d[p][x], d[p][z], d[x][z]);
                    const Rational yz = gromov_product(d[p][y], d[p][z], d[y][z]);
                    out.delta = std::max(out.delta, std::min(xz, yz) - xy);
                }
    return out;
}

std::array<std::array<int, 4>, 4> distance_table(const std::array<const Triple*, 4>& q, const AnnulusSystem& sys) {
    std::array<std::array<int, 4>, 4> d{};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) d[i][j] = d[j][i] = rho(*q[i], *q[j], sys).value;
    return d;
}

}  // namespace

HyperbolicityEstimate estimate_hyperbolicity(std::size_t samples, const AnnulusSystem& sys, std::uint64_t seed,
                                             const HyperbolicityOptions& opt) {
    require(samples >= 100, "estimate_hyperbolicity needs at least 100 samples");
    const auto spec = ModelSpec::defaults(sys.model());
    const Triple x0 = default_basepoint(sys.model());
    std::vector<Defects> per(samples);
    parallel_for(samples, opt.workers, [&](std::size_t i) {
        RandomStream rng(seed, i);
        auto orbit_point = [&] {
            for (;;) {
                const auto g = random_element(spec, rng, rng.below(opt.max_word_length + 1));
                try {
                    return act_triple(g, x0);
                } catch (const Error&) {
                    // images collided numerically on the circle; redraw
                }
            }
        };
        const Triple x = orbit_point(), y = orbit_point(), z = orbit_point(), p = orbit_point();
        per[i] = quadruple_defects(distance_table({&x, &y, &z, &p}, sys));
    });
    HyperbolicityEstimate out;
    out.samples = samples;
    out.seed = seed;
    for (const auto& d : per) {
        out.triangle_defect = std::max(out.triangle_defect, d.triangle);
        out.delta = std::max(out.delta, d.delta);
    }
    return out;
}

HyperbolicityEstimate hyperbolicity_of(const std::vector<Triple>& triples, const AnnulusSystem& sys) {
    const std::size_t n = triples.size();
    std::vector<std::vector<int>> d(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = rho(triples[i], triples[j], sys).value;
    HyperbolicityEstimate out;
    out.samples = n;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t z = 0; z < n; ++z) {
                out.triangle_defect = std::max(out.triangle_defect, d[x][y] - d[x][z] - d[z][y]);
                for (std::size_t p = 0; p < n; ++p) {
                    const Rational xy = gromov_product(d[p][x], d[p][y], d[x][y]);
                    const Rational xz = gromov_product(d[p][x], d[p][z], d[x][z]);
                    const Rational yz = gromov_product(d[p][y], d[p][z], d[y][z]);
                    out.delta = std::max(out.delta, std::min(xz, yz) - xy);
                }
            }
    return out;
}

// ---------------------------------------------------------------- displacement

std::string element_type_name(ElementType t) {
    switch (t) {
        case ElementType::loxodromic: return "loxodromic";
        case ElementType::parabolic: return "parabolic";
        case ElementType::elliptic: return "elliptic";
    }
    return "unknown";
}

ElementType classify_element(const GroupElement& g) {
    require(!g.is_identity(), "the identity has no displacement class");
    if (g.model() == Model::free_group) return ElementType::loxodromic;
    const auto tr = g.matrix().trace_abs();
    if (tr > 2) return ElementType::loxodromic;
    return tr == 2 ? ElementType::parabolic : ElementType::elliptic;
}

DisplacementProfile loxodromic_displacement(const GroupElement& g, const Triple& x, int n_max, const AnnulusSystem& sys) {
    require(n_max >= 0, "n_max must be nonnegative");
    DisplacementProfile out;
    out.type = classify_element(g);
    GroupElement gn = GroupElement::identity(g.model());
    for (int n = 0; n <= n_max; ++n) {
        out.points.emplace_back(n, n == 0 ? 0 : rho(x, act_triple(gn, x), sys).value);
        gn = gn * g;
    }
    return out;
}

double linear_lower_bound(const DisplacementProfile& profile, int period) {
    require(period >= 1, "period must be positive");
    double c = std::numeric_limits<double>::infinity();
    for (const auto& [n, v] : profile.points)
        if (n >= period && n % period == 0) c = std::min(c, double(v) / (n / period));
    return std::isinf(c) ? 0.0 : c;
}

LinearFit fit_linear_lower_bound(const DisplacementProfile& profile, int max_period) {
    for (int period = 1; period <= max_period; ++period)
        if (const double c = linear_lower_bound(profile, period); c > 0) return LinearFit{period, c};
    return {};
}

// ---------------------------------------------------------------- finite boundary

std::vector<RadiusValue> pair_crossratio_to_point(const BoundaryPoint& a, const BoundaryPoint& b, const BoundaryPoint& p,
                                                  const std::vector<AnnulusSystem>& systems) {
    require(!a.same_as(b), "pair_crossratio_to_point needs a != b");
    require(!p.same_as(a) && !p.same_as(b), "the point p must differ from a and b");
    std::vector<RadiusValue> out;
    for (const auto& sys : systems) out.push_back(RadiusValue{sys.ball_radius(), sys.crossratio({a, b}, {p})});
    return out;
}

std::vector<RadiusValue> pair_crossratio_to_point(const BoundaryPoint& a, const BoundaryPoint& b, const BoundaryPoint& p,
                                                  const ModelSpec& spec, const Annulus& generator,
                                                  const std::vector<std::size_t>& radii) {
    std::vector<AnnulusSystem> systems;
    for (std::size_t r : radii) systems.push_back(AnnulusSystem::build(spec, generator, r));
    return pair_crossratio_to_point(a, b, p, systems);
}

BoundaryBallIndicator::BoundaryBallIndicator(Triple c, int r) : center(std::move(c)), radius(r) {
    require(r >= 0, "boundary ball radius must be nonnegative");
}

bool in_boundary_ball_necessary(const BoundaryPoint& p, const BoundaryBallIndicator& ind, const AnnulusSystem& sys) {
    for (auto ij : kPairs)
        if (sys.crossratio(pair_of(ind.center, ij), {p}) > ind.radius) return false;
    return true;
}

// ---------------------------------------------------------------- lemma surrogates

std::vector<BoundaryPoint> cylinder_sample(const std::string& u, std::size_t count) {
    std::vector<BoundaryPoint> out;
    for (const auto& ut : f2::children(u)) {
        const char t = ut.back();
        for (char s : f2::kLetters) {
            if (s == f2::inverse_letter(t)) continue;
            if (out.size() == count) return out;
            out.emplace_back(f2::End::make(ut, std::string(1, s)));
        }
    }
    return out;
}

std::vector<std::string> cylinder_family(std::size_t max_depth) {
    std::vector<std::string> out;
    for (std::size_t n = 1; n <= max_depth; ++n)
        for (auto& w : f2::sphere(n)) out.push_back(std::move(w));
    return out;
}

std::vector<int> crossratio_sequence(const std::vector<BoundaryPoint>& xs, const std::vector<BoundaryPoint>& ys,
                                     const std::vector<BoundaryPoint>& zs, const std::vector<BoundaryPoint>& ts,
                                     const AnnulusSystem& sys) {
    require(xs.size() == ys.size() && ys.size() == zs.size() && zs.size() == ts.size(), "sequences differ in length");
    std::vector<int> out;
    for (std::size_t n = 0; n < xs.size(); ++n) out.push_back(sys.crossratio({xs[n], ys[n]}, {zs[n], ts[n]}));
    return out;
}

namespace {

void require_free_group(const AnnulusSystem& sys) {
    if (sys.model() != Model::free_group) fail(ErrorCode::model_mismatch, "cylinder families need the F2 model");
}

// Reference points spread over the whole boundary.
std::vector<BoundaryPoint> probe_points() {
    std::vector<BoundaryPoint> out;
    for (char c : f2::kLetters)
        for (auto& p : cylinder_sample(std::string(1, c), 2)) out.push_back(std::move(p));
    return out;
}

}  // namespace

LemmaConstant changing_points_constant(const AnnulusSystem& sys, std::size_t max_depth, std::size_t per_cylinder) {
    require_free_group(sys);
    const auto probes = probe_points();
    LemmaConstant out;
    out.value = std::numeric_limits<int>::min();
    for (const auto& u : cylinder_family(max_depth)) {
        const auto cyl = f2::CylinderUnion::cylinder(u);
        const auto inside = cylinder_sample(u, per_cylinder);
        std::vector<BoundaryPoint> outside;
        for (const auto& p : probes)
            if (!cyl.contains(p.end())) outside.push_back(p);
        for (std::size_t i = 0; i < inside.size(); ++i)
            for (std::size_t j = i + 1; j < inside.size(); ++j) {
                const PointSet xy{inside[i], inside[j]};
                for (const auto& c : outside) {
                    int best_b = std::numeric_limits<int>::max();
                    for (const auto& b : outside)
                        if (!b.same_as(c)) best_b = std::min(best_b, sys.crossratio(xy, {b, c}));
                    if (best_b == std::numeric_limits<int>::max()) continue;
                    for (const auto& a : inside) {
                        out.value = std::max(out.value, sys.crossratio(xy, {a, c}) - best_b);
                        out.configurations += outside.size() - 1;
                    }
                }
            }
    }
    out.value = std::max(out.value, 0);
    return out;
}

LemmaConstant gromov_bound_constant(const AnnulusSystem& sys, std::size_t max_depth, std::size_t per_cylinder) {
    require_free_group(sys);
    const auto probes = probe_points();
    const auto family = cylinder_family(max_depth);
    LemmaConstant out;
    for (const auto& u : family)
        for (const auto& v : family) {
            if (u.starts_with(v) || v.starts_with(u)) continue;  // closures must be disjoint
            const auto cu = f2::CylinderUnion::cylinder(u), cv = f2::CylinderUnion::cylinder(v);
            const auto in_i = cylinder_sample(u, per_cylinder), in_j = cylinder_sample(v, per_cylinder);
            const auto& a = in_i.front();
            const auto& c = in_j.front();
            for (const auto& b : probes) {
                if (cu.contains(b.end()) || cv.contains(b.end())) continue;
                for (std::size_t w = 0; w < in_i.size(); ++w)
                    for (std::size_t x = w + 1; x < in_i.size(); ++x) {
                        const PointSet wx{in_i[w], in_i[x]};
                        const int left_bc = sys.crossratio(wx, {b, c});
                        for (std::size_t y = 0; y < in_j.size(); ++y)
                            for (std::size_t z = y + 1; z < in_j.size(); ++z) {
                                const PointSet yz{in_j[y], in_j[z]};
                                const int k = left_bc + sys.crossratio({a, b}, yz) - sys.crossratio(wx, yz);
                                out.value = std::max(out.value, k);
                                ++out.configurations;
                            }
                    }
            }
        }
    return out;
}

}  // namespace convwalk
