#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <functional>
#include <numbers>

#include "convwalk/annuli.hpp"
#include "convwalk/error.hpp"

using namespace convwalk;

namespace {

BoundaryPoint E(const char* s) { return BoundaryPoint::parse(Model::free_group, s); }
GroupElement F(const char* w) { return GroupElement::parse(Model::free_group, w); }

const Annulus kA = Annulus::default_for(Model::free_group);

ClosedSet arc_set(double start, double length) { return ClosedSet(psl2::ArcUnion::of({psl2::Arc{start, length}})); }

// Brute-force longest chain: depth-first over every chain, using the order
// predicates directly rather than the system's cached relation.
int chain_oracle(const AnnulusSystem& sys, const PointSet& k, const PointSet& l) {
    const auto& es = sys.entries();
    std::function<int(std::size_t)> longest_from = [&](std::size_t i) {
        int best = annulus_less_set(es[i].annulus, l) ? 1 : 0;
        for (std::size_t j = 0; j < es.size(); ++j)
            if (annulus_less(es[i].annulus, es[j].annulus)) {
                const int tail = longest_from(j);
                if (tail > 0) best = std::max(best, tail + 1);
            }
        return best;
    };
    int best = 0;
    for (std::size_t i = 0; i < es.size(); ++i)
        if (set_less(k, es[i].annulus)) best = std::max(best, longest_from(i));
    return best;
}

}  // namespace

TEST_CASE("annulus invariants are enforced") {
    CHECK_THROWS_AS(Annulus(ClosedSet::cylinder("a"), ClosedSet::cylinder("ab")), Error);
    // covering the whole Cantor set leaves no gap
    CHECK_THROWS_AS(Annulus(ClosedSet(f2::CylinderUnion::of({"a", "b"})), ClosedSet(f2::CylinderUnion::of({"A", "B"}))),
                    Error);
    CHECK_THROWS_AS(Annulus(arc_set(0.0, 1.0), arc_set(0.5, 1.0)), Error);
    CHECK_NOTHROW(Annulus(arc_set(0.0, 1.0), arc_set(2.0, 1.0)));
    CHECK_THROWS_AS(Annulus(ClosedSet::cylinder("a"), arc_set(2.0, 1.0)), Error);
}

TEST_CASE("annulus_less: worked examples") {
    CHECK_FALSE(annulus_less(kA, kA));
    CHECK(annulus_less(kA.translate(F("A")), kA));
    CHECK_FALSE(annulus_less(kA, kA.translate(F("A"))));
    CHECK(annulus_less(kA, kA.translate(F("a"))));

    const double pi = std::numbers::pi;
    const Annulus a(arc_set(4.0, 0.5), arc_set(0.0, pi));
    const Annulus b(arc_set(pi - 0.1, pi), arc_set(6.2, 0.05));
    CHECK_FALSE(annulus_less(a, b));
    // the uncovered point
    const auto gap = BoundaryPoint(psl2::Point::from_angle(2 * pi - 0.05));
    CHECK_FALSE(a.plus().contains_interior(gap));
    CHECK_FALSE(b.minus().contains_interior(gap));
}

TEST_CASE("set_less and annulus_less_set") {
    CHECK(set_less(PointSet{E("AA(b)")}, kA));
    CHECK_FALSE(set_less(PointSet{E("AA(b)"), E("a(b)")}, kA));
    CHECK(set_less(PointSet{E("AA(b)"), E("AAA(b)")}, kA.translate(F("A"))));
    CHECK(annulus_less_set(kA, PointSet{E("a(b)"), E("(a)")}));
    CHECK_FALSE(annulus_less_set(kA, PointSet{E("(b)")}));
    CHECK(set_less(ClosedSet::cylinder("AA"), kA));
    CHECK_FALSE(set_less(ClosedSet::cylinder("b"), kA));
    CHECK(annulus_less_set(kA, ClosedSet::cylinder("ab")));
}

TEST_CASE("crossratio: worked F2 chains") {
    const auto spec = ModelSpec::defaults(Model::free_group);
    const auto sys0 = AnnulusSystem::build(spec, kA, 0);
    CHECK(sys0.size() == 2);
    const PointSet k0{E("A(b)"), E("AA(b)")}, l0{E("a(b)"), E("aa(b)")};
    CHECK(chain_oracle(sys0, k0, l0) == 1);
    CHECK(sys0.crossratio(k0, l0) == 1);

    const auto sys1 = AnnulusSystem::build(spec, kA, 1);
    const PointSet k1{E("AA(b)"), E("AAA(b)")}, l1{E("aa(b)"), E("aaa(b)")};
    CHECK(chain_oracle(sys1, k1, l1) == 3);
    CHECK(sys1.crossratio(k1, l1) == 3);
    const auto chain = sys1.crossratio_witness(k1, l1);
    REQUIRE(chain.size() == 3);
    CHECK(sys1.entries()[chain[0]].annulus.same_as(kA.translate(F("A"))));
    CHECK(sys1.entries()[chain[1]].annulus.same_as(kA));
    CHECK(sys1.entries()[chain[2]].annulus.same_as(kA.translate(F("a"))));

    // shared point
    CHECK(sys1.crossratio({E("AA(b)"), E("(b)")}, {E("(b)"), E("aa(b)")}) == 0);
    CHECK_THROWS_AS(sys1.crossratio({}, l1), Error);
}

TEST_CASE("crossratio matches the brute-force chain search") {
    const auto spec = ModelSpec::defaults(Model::free_group);
    const auto sys = AnnulusSystem::build(spec, kA, 2);
    RandomStream rng(5, 1);
    int nonzero = 0;
    for (int i = 0; i < 300; ++i) {
        PointSet k{random_boundary_point(Model::free_group, rng), random_boundary_point(Model::free_group, rng)};
        PointSet l{random_boundary_point(Model::free_group, rng), random_boundary_point(Model::free_group, rng)};
        const int got = sys.crossratio(k, l);
        CHECK(got == chain_oracle(sys, k, l));
        CHECK(sys.crossratio_witness(k, l).size() == std::size_t(got));
        nonzero += got > 0;
    }
    CHECK(nonzero > 0);
    // points deep in opposite cylinders give long chains
    const std::vector<std::string> stems{"", "A", "AA", "AAA", "Ab", "AAB", "a", "aa", "aaa", "ab", "aaB", "b", "bb"};
    int longest = 0;
    for (const auto& u : stems)
        for (const auto& v : stems) {
            PointSet k{BoundaryPoint(f2::End::make(u, "b")), BoundaryPoint(f2::End::make(u, "B"))};
            PointSet l{BoundaryPoint(f2::End::make(v, "b")), BoundaryPoint(f2::End::make(v + "a", "b"))};
            const int got = sys.crossratio(k, l);
            CHECK(got == chain_oracle(sys, k, l));
            longest = std::max(longest, got);
        }
    CHECK(longest >= 4);
}

TEST_CASE("order relation is a strict partial order on cached annuli") {
    for (Model m : {Model::free_group, Model::modular}) {
        const auto spec = ModelSpec::defaults(m);
        for (std::size_t r = 0; r <= 2; ++r) {
            const auto sys = AnnulusSystem::build(spec, Annulus::default_for(m), r);
            const auto& es = sys.entries();
            const std::size_t n = es.size();
            std::size_t relations = 0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK_FALSE(sys.less(i, i));
                for (std::size_t j = 0; j < n; ++j) {
                    CHECK(sys.less(i, j) == annulus_less(es[i].annulus, es[j].annulus));
                    if (!sys.less(i, j)) continue;
                    ++relations;
                    CHECK_FALSE(sys.less(j, i));
                    for (std::size_t k = 0; k < n; ++k)
                        if (sys.less(j, k)) CHECK(sys.less(i, k));
                }
            }
            if (r > 0) CHECK(relations > 0);
        }
    }
}

TEST_CASE("annulus systems are symmetric and deduplicated") {
    for (Model m : {Model::free_group, Model::modular}) {
        const auto sys = AnnulusSystem::build(ModelSpec::defaults(m), Annulus::default_for(m), 2);
        const auto& es = sys.entries();
        for (std::size_t i = 0; i < es.size(); ++i) {
            const auto neg = es[i].annulus.negate();
            CHECK(std::any_of(es.begin(), es.end(), [&](const auto& e) { return e.annulus.same_as(neg); }));
            for (std::size_t j = i + 1; j < es.size(); ++j) CHECK_FALSE(es[i].annulus.same_as(es[j].annulus));
        }
    }
    // 17 elements in the F2 ball of radius 2, each giving two distinct annuli
    const auto f2sys = AnnulusSystem::build(ModelSpec::defaults(Model::free_group), kA, 2);
    CHECK(f2sys.size() == 34);
}

TEST_CASE("crossratio is monotone in the ball radius") {
    for (Model m : {Model::free_group, Model::modular}) {
        const auto spec = ModelSpec::defaults(m);
        std::vector<AnnulusSystem> systems;
        for (std::size_t r = 0; r <= 3; ++r) systems.push_back(AnnulusSystem::build(spec, Annulus::default_for(m), r));
        RandomStream rng(17, static_cast<std::uint64_t>(m));
        for (int i = 0; i < 200; ++i) {
            PointSet k{random_boundary_point(m, rng), random_boundary_point(m, rng)};
            PointSet l{random_boundary_point(m, rng), random_boundary_point(m, rng)};
            for (std::size_t r = 0; r + 1 < systems.size(); ++r)
                CHECK(systems[r].crossratio(k, l) <= systems[r + 1].crossratio(k, l));
        }
    }
}

TEST_CASE("crossratio is equivariant under the translated system") {
    for (Model m : {Model::free_group, Model::modular}) {
        const auto spec = ModelSpec::defaults(m);
        const auto sys = AnnulusSystem::build(spec, Annulus::default_for(m), 2);
        RandomStream rng(23, static_cast<std::uint64_t>(m));
        for (int i = 0; i < 40; ++i) {
            const auto g = random_element(spec, rng, 1 + rng.below(3));
            const auto moved = sys.translated(g);
            for (int t = 0; t < 10; ++t) {
                PointSet k{random_boundary_point(m, rng), random_boundary_point(m, rng)};
                PointSet l{random_boundary_point(m, rng)};
                PointSet gk, gl;
                for (const auto& p : k) gk.push_back(act(g, p));
                for (const auto& p : l) gl.push_back(act(g, p));
                CHECK(moved.crossratio(gk, gl) == sys.crossratio(k, l));
            }
        }
    }
}

TEST_CASE("persisted annulus cache round-trips") {
    const auto dir = std::filesystem::temp_directory_path() / "convwalk_annuli_cache_test";
    std::filesystem::remove_all(dir);
    for (Model m : {Model::free_group, Model::modular}) {
        const auto spec = ModelSpec::defaults(m);
        const auto gen = Annulus::default_for(m);
        const auto built = AnnulusSystem::cached(dir, spec, gen, 2);
        const auto loaded = AnnulusSystem::cached(dir, spec, gen, 2);
        const auto direct = AnnulusSystem::from_json(built.to_json());
        REQUIRE(loaded.size() == built.size());
        CHECK(loaded.cache_key() == built.cache_key());
        for (std::size_t i = 0; i < built.size(); ++i) {
            CHECK(loaded.entries()[i].annulus.same_as(built.entries()[i].annulus));
            CHECK(direct.entries()[i].label == built.entries()[i].label);
            for (std::size_t j = 0; j < built.size(); ++j) CHECK(loaded.less(i, j) == built.less(i, j));
        }
    }
    // different radius uses a different key
    CHECK(cache_key(ModelSpec::defaults(Model::free_group), kA, 1) != cache_key(ModelSpec::defaults(Model::free_group), kA, 2));
    std::filesystem::remove_all(dir);
}
