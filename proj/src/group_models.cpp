#include "convwalk/group_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "convwalk/error.hpp"

namespace convwalk {

std::string model_name(Model m) { return m == Model::free_group ? "F2" : "PSL2Z"; }

Model parse_model(std::string_view name) {
    if (name == "F2") return Model::free_group;
    if (name == "PSL2Z") return Model::modular;
    fail(ErrorCode::invalid_argument, "unknown model '" + std::string(name) + "' (expected F2 or PSL2Z)");
}

void check_same_model(Model x, Model y, const char* what) {
    if (x != y)
        fail(ErrorCode::model_mismatch,
             std::string(what) + ": model mismatch (" + model_name(x) + " vs " + model_name(y) + ")");
}

// ---------------------------------------------------------------- GroupElement

GroupElement GroupElement::identity(Model m) {
    return m == Model::free_group ? GroupElement(f2::Word()) : GroupElement(psl2::Matrix());
}

GroupElement GroupElement::parse(Model m, std::string_view text) {
    return m == Model::free_group ? GroupElement(f2::Word::parse(text)) : GroupElement(psl2::Matrix::parse(text));
}

const f2::Word& GroupElement::word() const {
    if (auto* w = std::get_if<f2::Word>(&v_)) return *w;
    fail(ErrorCode::model_mismatch, "PSL2Z element has no free-group word");
}

const psl2::Matrix& GroupElement::matrix() const {
    if (auto* m = std::get_if<psl2::Matrix>(&v_)) return *m;
    fail(ErrorCode::model_mismatch, "F2 element has no matrix");
}

bool GroupElement::is_identity() const {
    return std::visit([](const auto& x) { return x.is_identity(); }, v_);
}

GroupElement GroupElement::inverse() const {
    return std::visit([](const auto& x) { return GroupElement(x.inverse()); }, v_);
}

GroupElement GroupElement::pow(long long n) const {
    return std::visit([n](const auto& x) { return GroupElement(x.pow(n)); }, v_);
}

GroupElement operator*(const GroupElement& x, const GroupElement& y) {
    check_same_model(x.model(), y.model(), "group product");
    if (x.model() == Model::free_group) return GroupElement(x.word() * y.word());
    return GroupElement(x.matrix() * y.matrix());
}

std::size_t GroupElement::word_length() const {
    if (auto* w = std::get_if<f2::Word>(&v_)) return w->length();
    return 0;
}

std::string GroupElement::to_string() const {
    return std::visit([](const auto& x) { return x.to_string(); }, v_);
}

bool operator<(const GroupElement& x, const GroupElement& y) {
    if (x.v_.index() != y.v_.index()) return x.v_.index() < y.v_.index();
    if (x.model() == Model::free_group) return x.word() < y.word();
    return x.matrix() < y.matrix();
}

// ---------------------------------------------------------------- BoundaryPoint

BoundaryPoint BoundaryPoint::parse(Model m, std::string_view text) {
    if (m == Model::free_group) return BoundaryPoint(f2::End::parse(text));
    if (text == "inf") return BoundaryPoint(psl2::Point::infinity());
    if (text.rfind("angle:", 0) == 0) return BoundaryPoint(psl2::Point::from_angle(std::stod(std::string(text.substr(6)))));
    const auto slash = text.find('/');
    try {
        if (slash != std::string_view::npos)
            return BoundaryPoint(psl2::Point::from_rational(std::stoll(std::string(text.substr(0, slash))),
                                                            std::stoll(std::string(text.substr(slash + 1)))));
        return BoundaryPoint(psl2::Point::from_real(std::stod(std::string(text))));
    } catch (const std::logic_error&) {
        fail(ErrorCode::invalid_argument, "cannot parse circle point '" + std::string(text) + "'");
    }
}

const f2::End& BoundaryPoint::end() const {
    if (auto* e = std::get_if<f2::End>(&v_)) return *e;
    fail(ErrorCode::model_mismatch, "circle point is not an F2 end");
}

const psl2::Point& BoundaryPoint::point() const {
    if (auto* p = std::get_if<psl2::Point>(&v_)) return *p;
    fail(ErrorCode::model_mismatch, "F2 end is not a circle point");
}

bool BoundaryPoint::same_as(const BoundaryPoint& other) const {
    check_same_model(model(), other.model(), "point comparison");
    if (model() == Model::free_group) return end() == other.end();
    return point().same_as(other.point());
}

std::string BoundaryPoint::to_string() const {
    return std::visit([](const auto& x) { return x.to_string(); }, v_);
}

// ---------------------------------------------------------------- ClosedSet

ClosedSet::ClosedSet(f2::CylinderUnion s) : v_(std::move(s)) {
    const auto& c = std::get<f2::CylinderUnion>(v_);
    require(!c.empty() && !c.is_whole(), "closed set must be a proper nonempty subset");
}

ClosedSet::ClosedSet(psl2::ArcUnion s) : v_(std::move(s)) {
    require(!std::get<psl2::ArcUnion>(v_).empty(), "closed set must be nonempty");
}

const f2::CylinderUnion& ClosedSet::cylinders() const {
    if (auto* c = std::get_if<f2::CylinderUnion>(&v_)) return *c;
    fail(ErrorCode::model_mismatch, "arc set has no cylinders");
}

const psl2::ArcUnion& ClosedSet::arcs() const {
    if (auto* a = std::get_if<psl2::ArcUnion>(&v_)) return *a;
    fail(ErrorCode::model_mismatch, "cylinder set has no arcs");
}

bool ClosedSet::contains(const BoundaryPoint& p) const {
    check_same_model(model(), p.model(), "set membership");
    if (model() == Model::free_group) return cylinders().contains(p.end());
    return arcs().contains(p.point());
}

bool ClosedSet::contains_interior(const BoundaryPoint& p) const {
    check_same_model(model(), p.model(), "set membership");
    if (model() == Model::free_group) return cylinders().contains(p.end());  // clopen
    return arcs().contains_interior(p.point());
}

bool ClosedSet::same_as(const ClosedSet& other) const {
    check_same_model(model(), other.model(), "set comparison");
    if (model() == Model::free_group) return cylinders() == other.cylinders();
    return arcs().same_as(other.arcs());
}

std::string ClosedSet::to_string() const {
    return std::visit([](const auto& x) { return x.to_string(); }, v_);
}

bool interiors_cover(const ClosedSet& x, const ClosedSet& y) {
    check_same_model(x.model(), y.model(), "cover test");
    if (x.model() == Model::free_group) return x.cylinders().unite(y.cylinders()).is_whole();
    std::vector<psl2::Arc> all = x.arcs().arcs();
    all.insert(all.end(), y.arcs().arcs().begin(), y.arcs().arcs().end());
    return psl2::interiors_cover_circle(all);
}

bool disjoint(const ClosedSet& x, const ClosedSet& y) {
    check_same_model(x.model(), y.model(), "disjointness test");
    if (x.model() == Model::free_group) return x.cylinders().intersect(y.cylinders()).empty();
    for (const auto& a : x.arcs().arcs())
        for (const auto& b : y.arcs().arcs())
            if (a.contains(b.start) || b.contains(a.start)) return false;
    return true;
}

BoundaryPoint act(const GroupElement& g, const BoundaryPoint& p) {
    check_same_model(g.model(), p.model(), "act");
    if (g.model() == Model::free_group) return BoundaryPoint(p.end().act(g.word()));
    return BoundaryPoint(p.point().act(g.matrix()));
}

ClosedSet act_set(const GroupElement& g, const ClosedSet& s) {
    check_same_model(g.model(), s.model(), "act_set");
    if (g.model() == Model::free_group) return ClosedSet(s.cylinders().image(g.word()));
    return ClosedSet(s.arcs().image(g.matrix()));
}

// ---------------------------------------------------------------- specs and balls

ModelSpec ModelSpec::defaults(Model m) {
    ModelSpec spec;
    spec.model = m;
    if (m == Model::free_group) {
        for (char c : f2::kLetters) spec.generators.emplace_back(std::string(1, c), GroupElement::parse(m, std::string(1, c)));
    } else {
        for (char c : {'H', 'h', 'T', 't'})
            spec.generators.emplace_back(std::string(1, c), GroupElement(psl2::Matrix::named(c)));
    }
    return spec;
}

std::vector<BallEntry> word_ball(const ModelSpec& spec, std::size_t radius) {
    require(!spec.generators.empty(), "model spec has no generators");
    std::vector<BallEntry> ball{{GroupElement::identity(spec.model), "", 0}};
    std::set<GroupElement> seen{ball.front().element};
    std::size_t level_begin = 0;
    for (std::size_t len = 1; len <= radius; ++len) {
        const std::size_t level_end = ball.size();
        std::vector<BallEntry> next;
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (const auto& [name, gen] : spec.generators) {
                GroupElement h = ball[i].element * gen;
                if (seen.insert(h).second) next.push_back({std::move(h), ball[i].label + name, len});
            }
        }
        std::stable_sort(next.begin(), next.end(), [](const BallEntry& x, const BallEntry& y) { return x.label < y.label; });
        level_begin = level_end;
        for (auto& e : next) ball.push_back(std::move(e));
    }
    return ball;
}

// ---------------------------------------------------------------- estimates

BoundaryPoint BoundaryEstimate::representative() const {
    if (model == Model::free_group) {
        const std::string tail = word.empty() ? std::string("a") : std::string(1, word.back());
        return BoundaryPoint(f2::End::make(word, tail));
    }
    return BoundaryPoint(psl2::Point::from_angle(centre));
}

bool BoundaryEstimate::contains(const BoundaryPoint& p) const {
    check_same_model(model, p.model(), "estimate membership");
    if (model == Model::free_group) return p.end().starts_with(word);
    return psl2::angular_distance(p.point().angle(), centre) <= half_width + psl2::kAngleTol;
}

std::string BoundaryEstimate::to_string() const {
    std::ostringstream os;
    if (model == Model::free_group) {
        os << "C(" << (word.empty() ? "e" : word) << ")";
    } else {
        os.precision(15);
        os << "arc(" << centre << "+-" << half_width << ")";
    }
    return os.str();
}

namespace {

constexpr std::size_t kPrefixCap = 1u << 16;

// Deepest cylinder containing all but at most one of the points.
std::string f2_cluster(const std::vector<f2::End>& pts) {
    std::string best;
    for (std::size_t skip = 0; skip <= pts.size(); ++skip) {
        const f2::End* first = nullptr;
        std::size_t depth = kPrefixCap;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == skip) continue;
            if (!first)
                first = &pts[i];
            else
                depth = std::min(depth, f2::common_prefix(*first, pts[i], depth));
        }
        if (first && depth > best.size()) best = first->head(depth);
    }
    return best;
}

struct ArcCluster {
    double centre;
    double half;
};

ArcCluster minimal_arc(std::vector<double> angles) {
    std::sort(angles.begin(), angles.end());
    double best_gap = -1.0, gap_end = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double from = angles[i];
        const double to = angles[(i + 1) % angles.size()];
        const double gap = angles.size() == 1 ? psl2::kTwoPi : psl2::ccw(from, to);
        if (gap > best_gap) {
            best_gap = gap;
            gap_end = to;
        }
    }
    const double len = psl2::kTwoPi - best_gap;
    return {psl2::wrap(gap_end + len / 2.0), len / 2.0};
}

// Tightest arc containing all but at most one of the points.
ArcCluster circle_cluster(const std::vector<double>& angles) {
    ArcCluster best{0.0, psl2::kTwoPi};
    for (std::size_t skip = 0; skip <= angles.size(); ++skip) {
        std::vector<double> rest;
        for (std::size_t i = 0; i < angles.size(); ++i)
            if (i != skip) rest.push_back(angles[i]);
        if (rest.empty()) continue;
        const auto c = minimal_arc(rest);
        if (c.half < best.half) best = c;
    }
    return best;
}

std::pair<BoundaryEstimate, double> tail_cluster(const std::vector<GroupElement>& seq,
                                                 const std::vector<BoundaryPoint>& probe) {
    const std::size_t n = seq.size();
    const std::size_t from = std::min(n - 1, static_cast<std::size_t>(std::floor(0.8 * double(n))));
    const Model model = probe.front().model();
    BoundaryEstimate est;
    est.model = model;
    if (model == Model::free_group) {
        std::vector<std::string> words;
        for (std::size_t k = from; k < n; ++k) {
            std::vector<f2::End> img;
            for (const auto& p : probe) img.push_back(act(seq[k], p).end());
            words.push_back(f2_cluster(img));
        }
        const std::string& target = words.back();
        std::size_t depth = target.size();
        for (const auto& w : words) {
            std::size_t d = 0;
            while (d < depth && d < w.size() && w[d] == target[d]) ++d;
            depth = d;
        }
        est.word = target.substr(0, depth);
        est.depth = depth;
        return {est, double(depth)};
    }
    std::vector<ArcCluster> clusters;
    for (std::size_t k = from; k < n; ++k) {
        std::vector<double> angles;
        for (const auto& p : probe) angles.push_back(act(seq[k], p).point().angle());
        clusters.push_back(circle_cluster(angles));
    }
    const double centre = clusters.back().centre;
    double spread = 0.0;
    for (const auto& c : clusters) spread = std::max(spread, psl2::angular_distance(c.centre, centre) + c.half);
    est.centre = centre;
    est.half_width = spread;
    est.depth = spread > 0 ? static_cast<std::size_t>(std::max(0.0, std::floor(std::log2(std::numbers::pi / spread)))) : 64;
    return {est, spread};
}

}  // namespace

ConvergenceReport convergence_subsequence(const std::vector<GroupElement>& seq, const std::vector<BoundaryPoint>& probe,
                                          const ConvergenceOptions& opt) {
    require(probe.size() >= 8, "convergence probe needs at least 8 points");
    require(!seq.empty(), "convergence sequence is empty");
    for (const auto& g : seq) check_same_model(g.model(), probe.front().model(), "convergence_subsequence");
    for (const auto& p : probe) check_same_model(p.model(), probe.front().model(), "convergence_subsequence");

    std::vector<GroupElement> inverses;
    inverses.reserve(seq.size());
    for (const auto& g : seq) inverses.push_back(g.inverse());

    auto [attr, attr_t] = tail_cluster(seq, probe);
    auto [rep, rep_t] = tail_cluster(inverses, probe);

    ConvergenceReport r;
    r.attracting_tightness = attr_t;
    r.repelling_tightness = rep_t;
    const bool f2 = probe.front().model() == Model::free_group;
    auto good = [&](double t) { return f2 ? t >= double(opt.min_depth) : t <= opt.max_spread; };
    r.conclusive = good(attr_t) && good(rep_t);
    if (r.conclusive) {
        r.attracting = attr;
        r.repelling = rep;
    }
    return r;
}

// ---------------------------------------------------------------- sampling helpers

std::string random_reduced_word(RandomStream& rng, std::size_t length) {
    std::string w;
    w.reserve(length);
    while (w.size() < length) {
        const char c = f2::kLetters[rng.below(4)];
        if (!w.empty() && w.back() == f2::inverse_letter(c)) continue;
        w.push_back(c);
    }
    return w;
}

BoundaryPoint random_boundary_point(Model m, RandomStream& rng, std::size_t max_prefix) {
    if (m == Model::modular) return BoundaryPoint(psl2::Point::from_angle(rng.uniform() * psl2::kTwoPi));
    const std::string prefix = random_reduced_word(rng, rng.below(std::max<std::size_t>(max_prefix, 1)));
    for (;;) {
        std::string block = random_reduced_word(rng, 1 + rng.below(2));
        if (!prefix.empty() && block.front() == f2::inverse_letter(prefix.back())) continue;
        if (block.size() > 1 && block.back() == f2::inverse_letter(block.front())) continue;
        return BoundaryPoint(f2::End::make(prefix, block));
    }
}

GroupElement random_element(const ModelSpec& spec, RandomStream& rng, std::size_t length) {
    if (spec.model == Model::free_group) return GroupElement(f2::Word::from_reduced(random_reduced_word(rng, length)));
    GroupElement g = GroupElement::identity(spec.model);
    for (std::size_t i = 0; i < length; ++i) g = g * spec.generators[rng.below(spec.generators.size())].second;
    return g;
}

}  // namespace convwalk
