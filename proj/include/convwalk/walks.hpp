#pragma once

// Random walks w_n = g_1 ... g_n driven by a finitely supported step law mu,
// their boundary limits, and the measure-level estimates built on them:
// hitting measure, stationarity defect, finite-boundary mass, Dirichlet
// extension, Cesaro proximality and strong almost transitivity probes.
//
// Path i of a run with seed s always uses RandomStream(s, i); every estimate
// reduces per-path results in path order, so outputs do not depend on the
// worker count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "convwalk/group_models.hpp"
#include "convwalk/quasimetric.hpp"
#include "convwalk/triple_space.hpp"

namespace convwalk {

// ---------------------------------------------------------------- step laws

class StepDistribution {
public:
    struct Atom {
        GroupElement element;
        double probability;
    };

    /// Probabilities must be positive and sum to 1 within 1e-12. Unless
    /// `generation_override` carries a justification, the symmetric part of
    /// the support must generate the whole group.
    explicit StepDistribution(std::vector<Atom> support, std::string generation_override = "");

    /// Uniform law on the model's default symmetric generators.
    static StepDistribution uniform(Model m);
    /// Point mass at g (not generating; the override records why).
    static StepDistribution point_mass(const GroupElement& g);

    Model model() const noexcept { return support_.front().element.model(); }
    const std::vector<Atom>& support() const noexcept { return support_; }
    const std::string& generation_override() const noexcept { return override_; }
    std::size_t max_word_length() const;

    const GroupElement& sample(RandomStream& rng) const;

private:
    std::vector<Atom> support_;
    std::vector<double> cumulative_;
    std::string override_;
};

/// True iff the elements generate F2 (Stallings folding) or PSL2Z (S and T
/// found among products of length <= 8).
bool generates_group(Model m, const std::vector<GroupElement>& elements);

// ---------------------------------------------------------------- paths

struct SamplePath {
    std::vector<GroupElement> increments;  ///< g_1 .. g_n
    std::vector<GroupElement> products;    ///< w_0 = e, w_k = w_{k-1} g_k
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

SamplePath sample_path(const StepDistribution& mu, std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

struct LimitOptions {
    std::size_t min_depth = 6;       ///< F2: cylinder depth needed for a verdict
    std::size_t min_arc_level = 10;  ///< circle: half-width pi / 2^level needed
};

/// Tukia limit of (w_n x): the deepest cylinder (or arc) that contains two
/// components of w_n x at every n of the final 20% of the path.
/// Requires at least 50 steps; nullopt means inconclusive.
std::optional<BoundaryEstimate> walk_boundary_limit(const SamplePath& path, const Triple& x, const LimitOptions& opt = {});

/// Same criterion on the window products alone.
std::optional<BoundaryEstimate> tukia_limit(const std::vector<GroupElement>& window, const Triple& x,
                                            const LimitOptions& opt = {});

// ---------------------------------------------------------------- measures

/// Bin masses: cylinders of length exactly `depth` (F2, in f2::sphere order)
/// or `arc_bins` uniform arcs [2 pi i / K, 2 pi (i+1) / K) (circle).
class EmpiricalMeasure {
public:
    static EmpiricalMeasure from_masses(Model m, std::size_t depth_or_bins, std::vector<double> masses);
    /// Exact hitting measure of the uniform walk on F2: 1 / (4 3^(d-1)) per cylinder.
    static EmpiricalMeasure tree_harmonic(std::size_t depth);

    Model model() const noexcept { return model_; }
    std::size_t depth() const noexcept { return depth_; }      ///< F2 only
    std::size_t arc_bins() const noexcept { return depth_; }   ///< circle only
    const std::vector<double>& masses() const noexcept { return masses_; }
    std::size_t bin_count() const noexcept { return masses_.size(); }
    std::string bin_label(std::size_t i) const;

    /// Mass of C(w) for |w| <= depth (sums the refining bins).
    double cylinder_mass(const std::string& w) const;
    /// Exact mass of a cylinder union of depth <= depth.
    double mass(const f2::CylinderUnion& s) const;
    double total() const;

    std::size_t trials = 0;
    std::size_t conclusive = 0;
    std::size_t inconclusive = 0;

private:
    EmpiricalMeasure(Model m, std::size_t d, std::vector<double> masses);
    Model model_;
    std::size_t depth_;
    std::vector<double> masses_;
    std::unordered_map<std::string, double> prefix_mass_;  // F2: mass of every C(w), |w| <= depth
};

struct HittingOptions {
    std::size_t depth = 6;       ///< F2 bin depth
    std::size_t arc_bins = 1024; ///< circle bins
    LimitOptions limit;
    std::optional<Triple> basepoint;          ///< default_basepoint if unset
    std::optional<GroupElement> start;        ///< walks g w_n (nu_g); identity if unset
    double max_inconclusive = 0.10;
    int workers = 1;
};

/// Empirical law of the walk limits over `trials` independent paths.
/// Throws ErrorCode::inconclusive when more than max_inconclusive of the
/// paths give no verdict.
EmpiricalMeasure estimate_hitting_measure(const StepDistribution& mu, std::size_t trials, std::size_t n,
                                          std::uint64_t seed, const HittingOptions& opt = {});

/// Per-path limit records, in path order (nullopt = inconclusive).
std::vector<std::optional<BoundaryEstimate>> sample_limits(const StepDistribution& mu, std::size_t trials, std::size_t n,
                                                           std::uint64_t seed, const HittingOptions& opt = {});

struct StationarityReport {
    double tv = 0.0;
    std::size_t tv_depth = 0;  ///< bins on which the defect is computed
};

/// TV distance between nu and sum_g mu(g) g nu on the cylinders of length
/// tv_depth (default: nu.depth() - max |g|, the deepest exact level).
/// Rejects (insufficient_resolution) levels whose preimages leave nu's bins.
StationarityReport check_stationarity(const EmpiricalMeasure& nu, const StepDistribution& mu,
                                      std::optional<std::size_t> tv_depth = std::nullopt);

// ---------------------------------------------------------------- finite boundary

struct FiniteBoundaryMass {
    double fraction = 0.0;
    std::size_t passing = 0;
    std::size_t conclusive = 0;
    std::size_t inconclusive = 0;
    bool saturated = false;  ///< R reaches the longest chain of the system
};

FiniteBoundaryMass estimate_finite_boundary_mass(const StepDistribution& mu, const AnnulusSystem& sys, const Triple& x,
                                                 int radius, std::size_t trials, std::size_t n, std::uint64_t seed,
                                                 const HittingOptions& opt = {});

/// True iff p is within tol of some rational p/q with 1 <= q <= max_den (or of inf).
bool near_cusp(const BoundaryPoint& p, long long max_den, double tol);

// ---------------------------------------------------------------- harmonic extension

/// f = constant + sum of weight * indicator(set).
struct BinFunction {
    double constant = 0.0;
    std::vector<std::pair<ClosedSet, double>> terms;

    static BinFunction one();
    static BinFunction indicator(ClosedSet s);
    double operator()(const BoundaryPoint& p) const;
    bool is_constant() const noexcept { return terms.empty(); }
};

struct MonteCarloValue {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// h(g) = integral of f against g nu, estimated from `trials` walk limits.
MonteCarloValue dirichlet_extension(const BinFunction& f, const GroupElement& g, const StepDistribution& mu,
                                    std::size_t trials, std::size_t n, std::uint64_t seed, const HittingOptions& opt = {});

struct HarmonicityCheck {
    MonteCarloValue at_g;
    MonteCarloValue averaged;  ///< sum_s mu(s) h(g s)
    double joint_standard_error = 0.0;
    double gap = 0.0;
};

/// |h(g) - sum_s mu(s) h(gs)| with every term from an independent substream.
HarmonicityCheck harmonicity_check(const BinFunction& f, const GroupElement& g, const StepDistribution& mu,
                                   std::size_t trials, std::size_t n, std::uint64_t seed, const HittingOptions& opt = {});

// ---------------------------------------------------------------- proximality

/// 2^-(shared prefix) on F2 ends, angular distance on the circle.
double boundary_distance(const BoundaryPoint& x, const BoundaryPoint& y);

struct CesaroPoint {
    std::size_t n = 0;
    double probability = 0.0;
    double standard_error = 0.0;
};

/// For each n: P[d(w_k x, w_k y) > eps] with k uniform in 1..n.
std::vector<CesaroPoint> cesaro_proximality(const BoundaryPoint& x, const BoundaryPoint& y, double eps,
                                            const StepDistribution& mu, const std::vector<std::size_t>& n_list,
                                            std::size_t trials, std::uint64_t seed, int workers = 1);

// ---------------------------------------------------------------- strong almost transitivity

struct SatWitness {
    GroupElement element;
    std::string label;
    double mass = 0.0;  ///< nu(g A)
};

/// First g in the word ball (BFS order) with nu(g A) > 1 - eps, computed
/// exactly on nu's cylinder bins. F2 only.
std::optional<SatWitness> sat_probe(const f2::CylinderUnion& a, double eps, std::size_t radius, const EmpiricalMeasure& nu,
                                    const ModelSpec& spec);

}  // namespace convwalk
