#include "convwalk/annuli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "convwalk/error.hpp"

namespace convwalk {

Annulus::Annulus(ClosedSet minus, ClosedSet plus) : minus_(std::move(minus)), plus_(std::move(plus)) {
    check_same_model(minus_.model(), plus_.model(), "annulus");
    require(disjoint(minus_, plus_), "annulus sides must be disjoint");
    if (model() == Model::free_group)
        require(!minus_.cylinders().unite(plus_.cylinders()).is_whole(), "annulus sides must not cover the boundary");
}

Annulus Annulus::default_for(Model m) {
    if (m == Model::free_group) return Annulus(ClosedSet::cylinder("A"), ClosedSet::cylinder("a"));
    const auto [attracting, repelling] = psl2::hyperbolic_fixed_points(psl2::Matrix::named('H'));
    const double radius = psl2::angular_distance(attracting.angle(), repelling.angle()) / 3.0;
    return Annulus(ClosedSet::arc(repelling.angle(), radius), ClosedSet::arc(attracting.angle(), radius));
}

bool annulus_less(const Annulus& a, const Annulus& b) { return interiors_cover(a.plus(), b.minus()); }

namespace {

bool inside_interior(const PointSet& pts, const ClosedSet& s) {
    return std::all_of(pts.begin(), pts.end(), [&](const BoundaryPoint& p) { return s.contains_interior(p); });
}

bool set_inside_interior(const ClosedSet& k, const ClosedSet& s) {
    check_same_model(k.model(), s.model(), "set order");
    if (k.model() == Model::free_group) return s.cylinders().contains(k.cylinders());
    for (const auto& b : k.arcs().arcs()) {
        bool inside = false;
        for (const auto& a : s.arcs().arcs()) {
            const double off = psl2::ccw(a.start, b.start);
            if (off > psl2::kAngleTol && off + b.length < a.length - psl2::kAngleTol) inside = true;
        }
        if (!inside) return false;
    }
    return true;
}

}  // namespace

bool set_less(const PointSet& k, const Annulus& a) { return inside_interior(k, a.minus()); }
bool set_less(const ClosedSet& k, const Annulus& a) { return set_inside_interior(k, a.minus()); }
bool annulus_less_set(const Annulus& a, const PointSet& l) { return inside_interior(l, a.plus()); }
bool annulus_less_set(const Annulus& a, const ClosedSet& l) { return set_inside_interior(l, a.plus()); }

// ---------------------------------------------------------------- AnnulusSystem

std::string cache_key(const ModelSpec& spec, const Annulus& generator, std::size_t ball_radius) {
    std::ostringstream os;
    os << model_name(spec.model) << "|gens=";
    for (const auto& [name, g] : spec.generators) os << name << "=" << g.to_string() << ";";
    os << "|A=" << generator.to_string() << "|r=" << ball_radius;
    return os.str();
}

AnnulusSystem AnnulusSystem::build(const ModelSpec& spec, const Annulus& generator, std::size_t ball_radius) {
    check_same_model(spec.model, generator.model(), "annulus system");
    AnnulusSystem sys(generator, ball_radius, convwalk::cache_key(spec, generator, ball_radius));
    const auto ball = word_ball(spec, ball_radius);

    std::map<std::pair<std::vector<std::string>, std::vector<std::string>>, bool> seen_f2;
    for (const auto& entry : ball) {
        for (int sign : {1, -1}) {
            Annulus a = (sign > 0 ? generator : generator.negate()).translate(entry.element);
            bool duplicate = false;
            if (a.model() == Model::free_group) {
                duplicate = !seen_f2.emplace(std::pair{a.minus().cylinders().words(), a.plus().cylinders().words()}, true).second;
            } else {
                duplicate = std::any_of(sys.entries_.begin(), sys.entries_.end(),
                                        [&](const Entry& e) { return e.annulus.same_as(a); });
            }
            if (!duplicate) sys.entries_.push_back(Entry{std::move(a), entry.label, sign});
        }
    }
    const std::size_t n = sys.entries_.size();
    sys.less_.assign(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sys.less_[i][j] = annulus_less(sys.entries_[i].annulus, sys.entries_[j].annulus) ? 1 : 0;
    sys.finish();
    return sys;
}

void AnnulusSystem::finish() {
    const std::size_t n = entries_.size();
    preds_.assign(n, {});
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (less_[i][j]) {
                preds_[j].push_back(i);
                ++indegree[j];
            }
    // Kahn's algorithm, smallest index first
    topo_.clear();
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push_back(i);
    std::size_t head = 0;
    while (head < ready.size()) {
        const std::size_t i = ready[head++];
        topo_.push_back(i);
        for (std::size_t j = 0; j < n; ++j)
            if (less_[i][j] && --indegree[j] == 0) ready.push_back(j);
    }
    if (topo_.size() != n)
        fail(ErrorCode::invalid_argument, "annulus order has a cycle; the system is not a strict partial order");
}

std::vector<int> AnnulusSystem::chain_lengths(const PointSet& k, const PointSet& l, std::vector<std::size_t>* pred) const {
    const std::size_t n = entries_.size();
    std::vector<int> best(n, 0);
    if (pred) pred->assign(n, n);
    for (const auto& p : k) check_same_model(p.model(), model(), "crossratio");
    for (const auto& p : l) check_same_model(p.model(), model(), "crossratio");
    for (std::size_t i : topo_) {
        if (set_less(k, entries_[i].annulus)) best[i] = 1;
        for (std::size_t p : preds_[i]) {
            if (best[p] > 0 && best[p] + 1 > best[i]) {
                best[i] = best[p] + 1;
                if (pred) (*pred)[i] = p;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (best[i] > 0 && !annulus_less_set(entries_[i].annulus, l)) best[i] = -best[i];
    return best;
}

int AnnulusSystem::crossratio(const PointSet& k, const PointSet& l) const {
    require(!k.empty() && !l.empty(), "crossratio needs nonempty point sets");
    int out = 0;
    for (int v : chain_lengths(k, l, nullptr)) out = std::max(out, v);
    return out;
}

std::vector<std::size_t> AnnulusSystem::crossratio_witness(const PointSet& k, const PointSet& l) const {
    require(!k.empty() && !l.empty(), "crossratio needs nonempty point sets");
    std::vector<std::size_t> pred;
    const auto best = chain_lengths(k, l, &pred);
    std::size_t end = entries_.size();
    int top = 0;
    for (std::size_t i = 0; i < best.size(); ++i)
        if (best[i] > top) {
            top = best[i];
            end = i;
        }
    std::vector<std::size_t> chain;
    while (end < entries_.size()) {
        chain.push_back(end);
        end = pred[end];
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

int AnnulusSystem::longest_chain() const {
    std::vector<int> best(entries_.size(), 1);
    int out = 0;
    for (std::size_t i : topo_) {
        for (std::size_t p : preds_[i]) best[i] = std::max(best[i], best[p] + 1);
        out = std::max(out, best[i]);
    }
    return out;
}

AnnulusSystem AnnulusSystem::translated(const GroupElement& g) const {
    AnnulusSystem sys(generator_.translate(g), radius_, key_ + "|translated=" + g.to_string());
    for (const auto& e : entries_) sys.entries_.push_back(Entry{e.annulus.translate(g), g.to_string() + "*" + e.label, e.sign});
    const std::size_t n = sys.entries_.size();
    sys.less_.assign(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sys.less_[i][j] = annulus_less(sys.entries_[i].annulus, sys.entries_[j].annulus) ? 1 : 0;
    sys.finish();
    return sys;
}

std::string AnnulusSystem::cache_key() const { return key_; }

// ---------------------------------------------------------------- persistence

nlohmann::json set_to_json(const ClosedSet& s) {
    if (s.model() == Model::free_group) return s.cylinders().words();
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& a : s.arcs().arcs()) arcs.push_back({a.start, a.length});
    return arcs;
}

ClosedSet set_from_json(Model m, const nlohmann::json& j) {
    if (m == Model::free_group) return ClosedSet(f2::CylinderUnion::of(j.get<std::vector<std::string>>()));
    std::vector<psl2::Arc> arcs;
    for (const auto& a : j) arcs.push_back(psl2::Arc{a.at(0).get<double>(), a.at(1).get<double>()});
    return ClosedSet(psl2::ArcUnion::of(std::move(arcs)));
}

nlohmann::json AnnulusSystem::to_json() const {
    nlohmann::json j;
    j["key"] = key_;
    j["model"] = model_name(model());
    j["ball_radius"] = radius_;
    j["generator"] = {{"minus", set_to_json(generator_.minus())}, {"plus", set_to_json(generator_.plus())}};
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        std::vector<std::size_t> succ;
        for (std::size_t k = 0; k < entries_.size(); ++k)
            if (less_[i][k]) succ.push_back(k);
        const auto& e = entries_[i];
        entries.push_back({{"label", e.label},
                           {"sign", e.sign},
                           {"minus", set_to_json(e.annulus.minus())},
                           {"plus", set_to_json(e.annulus.plus())},
                           {"less", succ}});
    }
    j["entries"] = std::move(entries);
    return j;
}

AnnulusSystem AnnulusSystem::from_json(const nlohmann::json& j) {
    try {
        const Model m = parse_model(j.at("model").get<std::string>());
        const auto& gen = j.at("generator");
        AnnulusSystem sys(Annulus(set_from_json(m, gen.at("minus")), set_from_json(m, gen.at("plus"))),
                          j.at("ball_radius").get<std::size_t>(), j.at("key").get<std::string>());
        for (const auto& e : j.at("entries"))
            sys.entries_.push_back(Entry{Annulus(set_from_json(m, e.at("minus")), set_from_json(m, e.at("plus"))),
                                         e.at("label").get<std::string>(), e.at("sign").get<int>()});
        const std::size_t n = sys.entries_.size();
        sys.less_.assign(n, std::vector<char>(n, 0));
        std::size_t i = 0;
        for (const auto& e : j.at("entries")) {
            for (std::size_t k : e.at("less").get<std::vector<std::size_t>>()) {
                require(k < n, "annulus cache refers to a missing entry");
                sys.less_[i][k] = 1;
            }
            ++i;
        }
        sys.finish();
        return sys;
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorCode::io, std::string("malformed annulus cache: ") + ex.what());
    }
}

AnnulusSystem AnnulusSystem::cached(const std::filesystem::path& dir, const ModelSpec& spec, const Annulus& generator,
                                    std::size_t ball_radius) {
    const std::string key = convwalk::cache_key(spec, generator, ball_radius);
    std::ostringstream name;
    name << "annuli_" << std::hex << std::hash<std::string>{}(key) << ".json";
    const auto path = dir / name.str();
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception&) {
            j = nullptr;
        }
        if (j.is_object() && j.value("key", std::string()) == key) return from_json(j);
    }
    AnnulusSystem sys = build(spec, generator, ball_radius);
    std::filesystem::create_directories(dir);
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write annulus cache " + path.string());
    out << sys.to_json().dump();
    return sys;
}

}  // namespace convwalk
