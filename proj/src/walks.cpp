#include "convwalk/walks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "convwalk/error.hpp"
#include "convwalk/parallel.hpp"

namespace convwalk {

// ---------------------------------------------------------------- generation

namespace {

// Stallings folding of the bouquet of loops spelling the words.
bool f2_generates(const std::vector<f2::Word>& words) {
    struct Edge {
        std::size_t from, to;
        char label;  // 'a' or 'b'
    };
    std::vector<Edge> edges;
    std::size_t vertices = 1;
    for (const auto& w : words) {
        const auto& s = w.letters();
        if (s.empty()) continue;
        std::size_t at = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::size_t next = (i + 1 == s.size()) ? 0 : vertices++;
            const char c = s[i];
            if (c == 'a' || c == 'b')
                edges.push_back({at, next, c});
            else
                edges.push_back({next, at, char(c - 'A' + 'a')});
            at = next;
        }
    }
    std::vector<std::size_t> parent(vertices);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (bool changed = true; changed;) {
        changed = false;
        std::map<std::pair<std::size_t, char>, std::size_t> out, in;
        for (const auto& e : edges) {
            const std::size_t u = find(e.from), v = find(e.to);
            auto [it, fresh] = out.emplace(std::pair{u, e.label}, v);
            if (!fresh && find(it->second) != v) {
                parent[find(it->second)] = v;
                changed = true;
            }
            auto [jt, fresh_in] = in.emplace(std::pair{find(e.to), e.label}, find(e.from));
            if (!fresh_in && find(jt->second) != find(e.from)) {
                parent[find(jt->second)] = find(e.from);
                changed = true;
            }
        }
    }
    std::set<std::size_t> classes;
    bool has_a = false, has_b = false;
    for (const auto& e : edges) {
        classes.insert(find(e.from));
        classes.insert(find(e.to));
        has_a = has_a || e.label == 'a';
        has_b = has_b || e.label == 'b';
    }
    return classes.size() == 1 && has_a && has_b;
}

bool psl2_generates(const std::vector<psl2::Matrix>& gens) {
    std::vector<psl2::Matrix> steps;
    for (const auto& g : gens) {
        steps.push_back(g);
        steps.push_back(g.inverse());
    }
    const auto s = psl2::Matrix::named('S'), t = psl2::Matrix::named('T');
    std::set<psl2::Matrix> seen{psl2::Matrix()};
    std::vector<psl2::Matrix> frontier{psl2::Matrix()};
    bool found_s = false, found_t = false;
    for (int len = 0; len < 8 && !(found_s && found_t); ++len) {
        std::vector<psl2::Matrix> next;
        for (const auto& m : frontier)
            for (const auto& g : steps) {
                auto p = m * g;
                if (!seen.insert(p).second) continue;
                found_s = found_s || p == s;
                found_t = found_t || p == t;
                next.push_back(std::move(p));
            }
        frontier = std::move(next);
    }
    return found_s && found_t;
}

}  // namespace

bool generates_group(Model m, const std::vector<GroupElement>& elements) {
    if (m == Model::free_group) {
        std::vector<f2::Word> words;
        for (const auto& g : elements) words.push_back(g.word());
        return f2_generates(words);
    }
    std::vector<psl2::Matrix> mats;
    for (const auto& g : elements) mats.push_back(g.matrix());
    return psl2_generates(mats);
}

// ---------------------------------------------------------------- step laws

StepDistribution::StepDistribution(std::vector<Atom> support, std::string generation_override)
    : support_(std::move(support)), override_(std::move(generation_override)) {
    if (support_.empty()) fail(ErrorCode::invalid_argument, "step distribution has empty support");
    double total = 0.0;
    for (const auto& atom : support_) {
        check_same_model(atom.element.model(), support_.front().element.model(), "step distribution");
        if (!(atom.probability > 0.0)) fail(ErrorCode::invalid_argument, "step probabilities must be positive");
        total += atom.probability;
        cumulative_.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::invalid_argument, "step probabilities must sum to 1");
    cumulative_.back() = 1.0;
    for (std::size_t i = 0; i < support_.size(); ++i)
        for (std::size_t j = i + 1; j < support_.size(); ++j)
            if (support_[i].element == support_[j].element)
                fail(ErrorCode::invalid_argument, "step distribution lists an element twice");
    if (override_.empty()) {
        std::vector<GroupElement> symmetric;
        for (const auto& atom : support_) {
            const auto inv = atom.element.inverse();
            if (std::any_of(support_.begin(), support_.end(), [&](const Atom& b) { return b.element == inv; }))
                symmetric.push_back(atom.element);
        }
        if (!generates_group(model(), symmetric))
            fail(ErrorCode::invalid_argument,
                 "the symmetric part of the support does not generate the group (set a generation override to proceed)");
    }
}

StepDistribution StepDistribution::uniform(Model m) {
    const auto spec = ModelSpec::defaults(m);
    std::vector<Atom> atoms;
    for (const auto& [name, g] : spec.generators) atoms.push_back(Atom{g, 1.0 / double(spec.generators.size())});
    return StepDistribution(std::move(atoms));
}

StepDistribution StepDistribution::point_mass(const GroupElement& g) {
    return StepDistribution({Atom{g, 1.0}}, "point mass: deterministic walk");
}

std::size_t StepDistribution::max_word_length() const {
    std::size_t out = 0;
    for (const auto& atom : support_) out = std::max(out, atom.element.word_length());
    return out;
}

const GroupElement& StepDistribution::sample(RandomStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return support_[std::min<std::size_t>(it - cumulative_.begin(), support_.size() - 1)].element;
}

// ---------------------------------------------------------------- paths

SamplePath sample_path(const StepDistribution& mu, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    RandomStream rng(seed, stream);
    SamplePath path;
    path.seed = seed;
    path.stream = stream;
    path.products.push_back(GroupElement::identity(mu.model()));
    for (std::size_t k = 0; k < n; ++k) {
        path.increments.push_back(mu.sample(rng));
        path.products.push_back(path.products.back() * path.increments.back());
    }
    return path;
}

namespace {

constexpr std::size_t kPrefixCap = 4096;
constexpr std::size_t kMinPathLength = 50;

std::size_t shared(const std::string& x, const std::string& y) {
    const std::size_t m = std::min(x.size(), y.size());
    std::size_t i = 0;
    while (i < m && x[i] == y[i]) ++i;
    return i;
}

// Reduced w.e truncated: exact on its first n - |w| letters.
std::string image_head(const std::string& w, const std::string& head) {
    std::size_t k = 0;
    while (k < w.size() && k < head.size() && head[k] == f2::inverse_letter(w[w.size() - 1 - k])) ++k;
    std::string out;
    out.reserve(w.size() + head.size() - 2 * k);
    out.append(w, 0, w.size() - k);
    out.append(head, k, std::string::npos);
    return out;
}

std::optional<BoundaryEstimate> f2_limit(const std::vector<std::string>& window, const Triple& x, std::size_t min_depth) {
    // two image ends w x^i, w x^j share at most |w| + lcp(x^i, x^j) letters, so
    // heads of length 2|w| + lcp + 2 give the exact common prefixes
    std::size_t base = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) base = std::max(base, f2::common_prefix(x[i].end(), x[j].end(), kPrefixCap));
    std::size_t longest = 0;
    for (const auto& w : window) longest = std::max(longest, w.size());
    const std::size_t n = 2 * longest + base + 2;
    const std::array<std::string, 3> heads{x[0].end().head(n), x[1].end().head(n), x[2].end().head(n)};

    std::vector<std::array<std::string, 3>> lcps;
    lcps.reserve(window.size());
    for (const auto& w : window) {
        const std::string e0 = image_head(w, heads[0]), e1 = image_head(w, heads[1]), e2 = image_head(w, heads[2]);
        lcps.push_back({e0.substr(0, shared(e0, e1)), e0.substr(0, shared(e0, e2)), e1.substr(0, shared(e1, e2))});
    }
    std::string best;
    for (const auto& candidate : lcps.front()) {
        std::size_t len = candidate.size();
        for (const auto& step : lcps) {
            std::size_t here = 0;
            for (const auto& s : step) here = std::max(here, shared(candidate, s));
            len = std::min(len, here);
        }
        if (len > best.size()) best = candidate.substr(0, len);
    }
    if (best.size() < min_depth) return std::nullopt;
    BoundaryEstimate est;
    est.model = Model::free_group;
    est.word = best;
    est.depth = best.size();
    return est;
}

double circular_midpoint(double s, double t) {
    const double d = std::remainder(t - s, psl2::kTwoPi);
    return psl2::wrap(s + d / 2.0);
}

std::optional<BoundaryEstimate> circle_limit(const std::vector<GroupElement>& window, const Triple& x,
                                             std::size_t min_level) {
    std::vector<std::array<double, 3>> angles;
    angles.reserve(window.size());
    for (const auto& w : window)
        angles.push_back({x[0].point().act(w.matrix()).angle(), x[1].point().act(w.matrix()).angle(),
                          x[2].point().act(w.matrix()).angle()});
    // centre: midpoint of the closest pair at the last step
    const auto& last = angles.back();
    double centre = 0.0, gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (const double d = psl2::angular_distance(last[i], last[j]); d < gap) {
                gap = d;
                centre = circular_midpoint(last[i], last[j]);
            }
    // smallest arc around the centre holding two components at every step
    double half = 0.0;
    for (const auto& a : angles) {
        std::array<double, 3> d{psl2::angular_distance(centre, a[0]), psl2::angular_distance(centre, a[1]),
                                psl2::angular_distance(centre, a[2])};
        std::sort(d.begin(), d.end());
        half = std::max(half, d[1]);
    }
    const double needed = std::numbers::pi / std::ldexp(1.0, int(min_level));
    if (half > needed) return std::nullopt;
    BoundaryEstimate est;
    est.model = Model::modular;
    est.centre = centre;
    est.half_width = half;
    est.depth = half > 0 ? std::size_t(std::floor(std::log2(std::numbers::pi / half))) : 1024;
    return est;
}

}  // namespace

std::optional<BoundaryEstimate> tukia_limit(const std::vector<GroupElement>& window, const Triple& x,
                                            const LimitOptions& opt) {
    require(!window.empty(), "empty window");
    for (const auto& w : window) check_same_model(w.model(), x.model(), "walk limit");
    if (x.model() == Model::modular) return circle_limit(window, x, opt.min_arc_level);
    std::vector<std::string> words;
    words.reserve(window.size());
    for (const auto& w : window) words.push_back(w.word().letters());
    return f2_limit(words, x, opt.min_depth);
}

std::optional<BoundaryEstimate> walk_boundary_limit(const SamplePath& path, const Triple& x, const LimitOptions& opt) {
    if (path.increments.size() < kMinPathLength) return std::nullopt;
    const std::size_t start = eventual_start(path.products.size());
    return tukia_limit(std::vector<GroupElement>(path.products.begin() + std::ptrdiff_t(start), path.products.end()), x,
                       opt);
}

// ---------------------------------------------------------------- measures

EmpiricalMeasure::EmpiricalMeasure(Model m, std::size_t d, std::vector<double> masses)
    : model_(m), depth_(d), masses_(std::move(masses)) {
    require(d >= 1, "measure resolution must be at least 1");
    const std::size_t expected = m == Model::free_group ? f2::sphere_size(d) : d;
    require(masses_.size() == expected, "bin count does not match the resolution");
    for (double v : masses_) require(v >= 0.0, "bin masses must be nonnegative");
    require(std::abs(total() - 1.0) <= 1e-12, "bin masses must sum to 1");
    if (m != Model::free_group) return;
    const auto words = f2::sphere(d);
    for (std::size_t i = 0; i < words.size(); ++i)
        for (std::size_t k = 0; k <= d; ++k) prefix_mass_[words[i].substr(0, k)] += masses_[i];
    prefix_mass_[""] = total();
}

EmpiricalMeasure EmpiricalMeasure::from_masses(Model m, std::size_t depth_or_bins, std::vector<double> masses) {
    return EmpiricalMeasure(m, depth_or_bins, std::move(masses));
}

EmpiricalMeasure EmpiricalMeasure::tree_harmonic(std::size_t depth) {
    const std::size_t n = f2::sphere_size(depth);
    return EmpiricalMeasure(Model::free_group, depth, std::vector<double>(n, 1.0 / double(n)));
}

std::string EmpiricalMeasure::bin_label(std::size_t i) const {
    if (model_ == Model::free_group) return f2::sphere(depth_).at(i);
    return std::to_string(i);
}

double EmpiricalMeasure::total() const {
    // pairwise summation keeps the error at a few ulps for 1e4 bins
    std::vector<double> v = masses_;
    while (v.size() > 1) {
        std::vector<double> next((v.size() + 1) / 2, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) next[i / 2] += v[i];
        v = std::move(next);
    }
    return v.empty() ? 0.0 : v[0];
}

double EmpiricalMeasure::cylinder_mass(const std::string& w) const {
    if (model_ != Model::free_group) fail(ErrorCode::model_mismatch, "cylinder masses need the F2 model");
    if (w.size() > depth_)
        fail(ErrorCode::insufficient_resolution, "cylinder C(" + w + ") is finer than the measure's bins");
    const auto it = prefix_mass_.find(w);
    if (it == prefix_mass_.end()) fail(ErrorCode::invalid_argument, "cylinder word must be reduced");
    return it->second;
}

double EmpiricalMeasure::mass(const f2::CylinderUnion& s) const {
    double sum = 0.0;
    for (const auto& w : s.words()) sum += cylinder_mass(w);
    return sum;
}

namespace {

struct PathOutcome {
    std::optional<BoundaryEstimate> limit;
};

std::optional<BoundaryEstimate> run_path(const StepDistribution& mu, std::size_t n, std::uint64_t seed, std::uint64_t i,
                                         const Triple& x, const GroupElement& start, const LimitOptions& limit) {
    require(n >= kMinPathLength, "walk length must be at least 50 for a limit verdict");
    RandomStream rng(seed, i);
    const std::size_t window_start = eventual_start(n + 1);
    if (mu.model() == Model::free_group) {
        // in-place reduction; one letter append or cancel per generator letter
        std::vector<std::string> window;
        window.reserve(n + 1 - window_start);
        std::string w = start.word().letters();
        if (window_start == 0) window.push_back(w);
        for (std::size_t k = 1; k <= n; ++k) {
            for (char c : mu.sample(rng).word().letters()) {
                if (!w.empty() && w.back() == f2::inverse_letter(c))
                    w.pop_back();
                else
                    w.push_back(c);
            }
            if (k >= window_start) window.push_back(w);
        }
        return f2_limit(window, x, limit.min_depth);
    }
    std::vector<GroupElement> window;
    window.reserve(n + 1 - window_start);
    GroupElement w = start;
    if (window_start == 0) window.push_back(w);
    for (std::size_t k = 1; k <= n; ++k) {
        w = w * mu.sample(rng);
        if (k >= window_start) window.push_back(w);
    }
    return circle_limit(window, x, limit.min_arc_level);
}

Triple basepoint_for(const StepDistribution& mu, const HittingOptions& opt) {
    if (opt.basepoint) {
        check_same_model(opt.basepoint->model(), mu.model(), "basepoint");
        return *opt.basepoint;
    }
    return default_basepoint(mu.model());
}

}  // namespace

std::vector<std::optional<BoundaryEstimate>> sample_limits(const StepDistribution& mu, std::size_t trials, std::size_t n,
                                                           std::uint64_t seed, const HittingOptions& opt) {
    const Triple x = basepoint_for(mu, opt);
    const GroupElement start = opt.start.value_or(GroupElement::identity(mu.model()));
    check_same_model(start.model(), mu.model(), "start element");
    LimitOptions limit = opt.limit;
    if (mu.model() == Model::free_group) limit.min_depth = std::max(limit.min_depth, opt.depth);
    std::vector<std::optional<BoundaryEstimate>> out(trials);
    parallel_for(trials, opt.workers, [&](std::size_t i) { out[i] = run_path(mu, n, seed, i, x, start, limit); });
    return out;
}

EmpiricalMeasure estimate_hitting_measure(const StepDistribution& mu, std::size_t trials, std::size_t n,
                                          std::uint64_t seed, const HittingOptions& opt) {
    require(trials >= 100, "estimate_hitting_measure needs at least 100 trials");
    const bool f2 = mu.model() == Model::free_group;
    const auto limits = sample_limits(mu, trials, n, seed, opt);
    const std::size_t bins = f2 ? f2::sphere_size(opt.depth) : opt.arc_bins;
    std::unordered_map<std::string, std::size_t> bin_of;
    if (f2) {
        const auto words = f2::sphere(opt.depth);
        for (std::size_t i = 0; i < words.size(); ++i) bin_of.emplace(words[i], i);
    }
    std::vector<std::size_t> counts(bins, 0);
    std::size_t conclusive = 0;
    for (const auto& lim : limits) {
        if (!lim) continue;
        ++conclusive;
        if (f2) {
            ++counts[bin_of.at(lim->word.substr(0, opt.depth))];
        } else {
            const auto b = std::size_t(std::floor(lim->centre / psl2::kTwoPi * double(bins)));
            ++counts[std::min(b, bins - 1)];
        }
    }
    const std::size_t inconclusive = trials - conclusive;
    if (double(inconclusive) > opt.max_inconclusive * double(trials) || conclusive == 0)
        fail(ErrorCode::inconclusive, std::to_string(inconclusive) + " of " + std::to_string(trials) +
                                          " paths gave no boundary limit; increase the walk length n");
    std::vector<double> masses(bins);
    for (std::size_t i = 0; i < bins; ++i) masses[i] = double(counts[i]) / double(conclusive);
    // absorb the rounding of count / conclusive so the bins sum to 1
    const double excess = std::accumulate(masses.begin(), masses.end(), 0.0) - 1.0;
    if (std::abs(excess) > 1e-12) {
        const auto big = std::max_element(masses.begin(), masses.end());
        *big -= excess;
    }
    auto out = EmpiricalMeasure::from_masses(mu.model(), f2 ? opt.depth : bins, std::move(masses));
    out.trials = trials;
    out.conclusive = conclusive;
    out.inconclusive = inconclusive;
    return out;
}

StationarityReport check_stationarity(const EmpiricalMeasure& nu, const StepDistribution& mu,
                                      std::optional<std::size_t> tv_depth) {
    check_same_model(nu.model(), mu.model(), "stationarity");
    if (nu.model() != Model::free_group)
        fail(ErrorCode::model_mismatch, "exact pushforwards are available on the F2 cylinder bins only");
    const std::size_t reach = mu.max_word_length();
    if (nu.depth() < reach + 1)
        fail(ErrorCode::insufficient_resolution, "bin depth " + std::to_string(nu.depth()) +
                                                     " is too shallow for exact pushforward by steps of length " +
                                                     std::to_string(reach));
    const std::size_t level = tv_depth.value_or(nu.depth() - reach);
    if (level < 1 || level + reach > nu.depth())
        fail(ErrorCode::insufficient_resolution, "defect level " + std::to_string(level) +
                                                     " needs bins of depth " + std::to_string(level + reach));
    std::vector<f2::Word> inverses;
    for (const auto& atom : mu.support()) inverses.push_back(atom.element.word().inverse());
    double tv = 0.0;
    for (const auto& w : f2::sphere(level)) {
        double pushed = 0.0;
        for (std::size_t k = 0; k < inverses.size(); ++k)
            pushed += mu.support()[k].probability * nu.mass(f2::cylinder_image(inverses[k], w));
        tv += std::abs(nu.cylinder_mass(w) - pushed);
    }
    return StationarityReport{tv / 2.0, level};
}

// ---------------------------------------------------------------- finite boundary

FiniteBoundaryMass estimate_finite_boundary_mass(const StepDistribution& mu, const AnnulusSystem& sys, const Triple& x,
                                                 int radius, std::size_t trials, std::size_t n, std::uint64_t seed,
                                                 const HittingOptions& opt) {
    require(trials >= 100, "estimate_finite_boundary_mass needs at least 100 trials");
    check_same_model(sys.model(), mu.model(), "finite boundary mass");
    const BoundaryBallIndicator ind(x, radius);
    const auto limits = sample_limits(mu, trials, n, seed, opt);
    std::vector<char> pass(trials, 0);
    parallel_for(trials, opt.workers, [&](std::size_t i) {
        if (limits[i]) pass[i] = in_boundary_ball_necessary(limits[i]->representative(), ind, sys) ? 1 : 0;
    });
    FiniteBoundaryMass out;
    for (std::size_t i = 0; i < trials; ++i) {
        if (!limits[i]) {
            ++out.inconclusive;
            continue;
        }
        ++out.conclusive;
        out.passing += std::size_t(pass[i]);
    }
    if (double(out.inconclusive) > opt.max_inconclusive * double(trials) || out.conclusive == 0)
        fail(ErrorCode::inconclusive, "too many paths gave no boundary limit; increase the walk length n");
    out.fraction = double(out.passing) / double(out.conclusive);
    out.saturated = radius >= sys.longest_chain();
    return out;
}

bool near_cusp(const BoundaryPoint& p, long long max_den, double tol) {
    const auto& pt = p.point();
    if (psl2::angular_distance(pt.angle(), 0.0) <= tol) return true;  // infinity
    const double t = pt.x() / pt.y();
    for (long long q = 1; q <= max_den; ++q) {
        const double num = std::round(t * double(q));
        if (psl2::angular_distance(pt.angle(), psl2::Point::from_rational((long long)num, q).angle()) <= tol) return true;
    }
    return false;
}

// ---------------------------------------------------------------- harmonic extension

BinFunction BinFunction::one() { return BinFunction{1.0, {}}; }

BinFunction BinFunction::indicator(ClosedSet s) {
    BinFunction f;
    f.terms.emplace_back(std::move(s), 1.0);
    return f;
}

double BinFunction::operator()(const BoundaryPoint& p) const {
    double v = constant;
    for (const auto& [set, weight] : terms)
        if (set.contains(p)) v += weight;
    return v;
}

namespace {

MonteCarloValue summarize(const std::vector<double>& values) {
    MonteCarloValue out;
    out.samples = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / double(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.standard_error = std::sqrt(ss / double(values.size() - 1) / double(values.size()));
    }
    return out;
}

}  // namespace

MonteCarloValue dirichlet_extension(const BinFunction& f, const GroupElement& g, const StepDistribution& mu,
                                    std::size_t trials, std::size_t n, std::uint64_t seed, const HittingOptions& opt) {
    check_same_model(g.model(), mu.model(), "dirichlet extension");
    HittingOptions o = opt;
    o.start = g;
    const auto limits = sample_limits(mu, trials, n, seed, o);
    std::vector<double> values;
    values.reserve(trials);
    for (const auto& lim : limits)
        if (lim) values.push_back(f(lim->representative()));
    if (double(trials - values.size()) > opt.max_inconclusive * double(trials) || values.empty())
        fail(ErrorCode::inconclusive, "too many paths gave no boundary limit; increase the walk length n");
    return summarize(values);
}

HarmonicityCheck harmonicity_check(const BinFunction& f, const GroupElement& g, const StepDistribution& mu,
                                   std::size_t trials, std::size_t n, std::uint64_t seed, const HittingOptions& opt) {
    HarmonicityCheck out;
    out.at_g = dirichlet_extension(f, g, mu, trials, n, derive_seed(seed, 0), opt);
    double var = out.at_g.standard_error * out.at_g.standard_error;
    double avg = 0.0, avg_var = 0.0;
    for (std::size_t k = 0; k < mu.support().size(); ++k) {
        const auto& atom = mu.support()[k];
        const auto h = dirichlet_extension(f, g * atom.element, mu, trials, n, derive_seed(seed, k + 1), opt);
        avg += atom.probability * h.mean;
        avg_var += atom.probability * atom.probability * h.standard_error * h.standard_error;
    }
    out.averaged = MonteCarloValue{avg, std::sqrt(avg_var), trials};
    out.joint_standard_error = std::sqrt(var + avg_var);
    out.gap = std::abs(out.at_g.mean - avg);
    return out;
}

// ---------------------------------------------------------------- proximality

double boundary_distance(const BoundaryPoint& x, const BoundaryPoint& y) {
    check_same_model(x.model(), y.model(), "boundary distance");
    if (x.model() == Model::free_group) {
        if (x.end() == y.end()) return 0.0;
        return std::ldexp(1.0, -int(f2::common_prefix(x.end(), y.end(), kPrefixCap)));
    }
    return psl2::angular_distance(x.point().angle(), y.point().angle());
}

std::vector<CesaroPoint> cesaro_proximality(const BoundaryPoint& x, const BoundaryPoint& y, double eps,
                                            const StepDistribution& mu, const std::vector<std::size_t>& n_list,
                                            std::size_t trials, std::uint64_t seed, int workers) {
    check_same_model(x.model(), mu.model(), "cesaro proximality");
    require(!x.same_as(y), "cesaro proximality needs x != y");
    require(trials >= 1, "cesaro proximality needs trials");
    std::vector<CesaroPoint> out;
    for (std::size_t n : n_list) {
        require(n >= 1, "cesaro horizon must be positive");
        const std::uint64_t run_seed = derive_seed(seed, n);
        std::vector<char> far(trials, 0);
        parallel_for(trials, workers, [&](std::size_t t) {
            RandomStream rng(run_seed, t);
            const std::size_t k = 1 + rng.below(n);
            GroupElement w = GroupElement::identity(mu.model());
            for (std::size_t s = 0; s < k; ++s) w = w * mu.sample(rng);
            far[t] = boundary_distance(act(w, x), act(w, y)) > eps ? 1 : 0;
        });
        const double p = double(std::count(far.begin(), far.end(), 1)) / double(trials);
        out.push_back(CesaroPoint{n, p, std::sqrt(p * (1.0 - p) / double(trials))});
    }
    return out;
}

// ---------------------------------------------------------------- strong almost transitivity

std::optional<SatWitness> sat_probe(const f2::CylinderUnion& a, double eps, std::size_t radius, const EmpiricalMeasure& nu,
                                    const ModelSpec& spec) {
    if (nu.model() != Model::free_group || spec.model != Model::free_group)
        fail(ErrorCode::model_mismatch, "sat_probe computes exact pushforwards on F2 cylinder bins");
    require(!a.empty(), "sat_probe needs a nonempty set");
    if (a.max_depth() + radius > nu.depth())
        fail(ErrorCode::insufficient_resolution, "bins of depth " + std::to_string(nu.depth()) +
                                                     " cannot resolve translates of depth " +
                                                     std::to_string(a.max_depth() + radius));
    require(nu.mass(a) > 0.0, "sat_probe needs nu(A) > 0");
    for (const auto& entry : word_ball(spec, radius)) {
        const double m = nu.mass(a.image(entry.element.word()));
        if (m > 1.0 - eps) return SatWitness{entry.element, entry.label, m};
    }
    return std::nullopt;
}

}  // namespace convwalk
