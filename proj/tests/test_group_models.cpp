#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "convwalk/error.hpp"
#include "convwalk/group_models.hpp"

using namespace convwalk;

namespace {

GroupElement F(const char* w) { return GroupElement::parse(Model::free_group, w); }
BoundaryPoint E(const char* s) { return BoundaryPoint::parse(Model::free_group, s); }

// Membership oracle working on raw strings only: p in g*S iff the first
// letters of g^-1 p start one of S's words.
bool image_membership_oracle(const GroupElement& g, const f2::CylinderUnion& s, const f2::End& p) {
    const std::string ginv = g.inverse().word().letters();
    const std::string moved = f2::free_reduce(ginv + p.head(ginv.size() + 16));
    for (const auto& w : s.words())
        if (moved.compare(0, w.size(), w) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("free words reduce and multiply") {
    CHECK(F("aAb").word().letters() == "b");
    CHECK((F("ab") * F("Ba")).word().letters() == "aa");
    CHECK(F("abA").inverse() == F("aBA"));
    CHECK(F("a").pow(5).word().letters() == "aaaaa");
    CHECK(F("ab").pow(-2).word().letters() == "BABA");
    CHECK(F("e").is_identity());
}

TEST_CASE("ends have a canonical eventually periodic form") {
    CHECK(f2::End::make("ab", "b") == f2::End::make("a", "b"));
    CHECK(f2::End::make("", "abab").block() == "ab");
    CHECK(f2::End::make("Aa", "b") == f2::End::make("", "b"));
    CHECK(f2::End::make("b", "ab").to_string() == "(ba)");
    CHECK_THROWS_AS(f2::End::make("", "aA"), Error);
    CHECK_THROWS_AS(f2::End::make("", "aB" "A"), Error);  // aBA is not cyclically reduced
    const auto e = f2::End::parse("ab(aB)");
    CHECK(e.head(6) == "abaBaB");
    CHECK(f2::End::parse("ab(Ba)").head(4) == "aaBa");
}

TEST_CASE("act: identity, cancellation, parabolic fixed point") {
    const auto p = E("ab(B)");
    CHECK(act(GroupElement::identity(Model::free_group), p).same_as(p));
    CHECK(act(F("a"), E("A(b)")).same_as(E("(b)")));

    const auto T = GroupElement::parse(Model::modular, "T");
    const auto inf = BoundaryPoint::parse(Model::modular, "inf");
    CHECK(act(T, inf).same_as(inf));
    CHECK(act(T, BoundaryPoint::parse(Model::modular, "1/2")).same_as(BoundaryPoint::parse(Model::modular, "3/2")));
}

TEST_CASE("act rejects mixed models") {
    try {
        (void)act(F("a"), BoundaryPoint::parse(Model::modular, "inf"));
        FAIL("expected model mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::model_mismatch);
    }
}

TEST_CASE("cylinder unions normalize canonically") {
    CHECK(f2::CylinderUnion::of({"A", "b", "B"}) == f2::CylinderUnion::cylinder("a").complement());
    CHECK(f2::CylinderUnion::of({"a", "ab", "aab"}).words() == std::vector<std::string>{"a"});
    CHECK(f2::CylinderUnion::of({"aa", "ab", "aB"}).words() == std::vector<std::string>{"a"});
    CHECK(f2::CylinderUnion::of({"a", "A", "b", "B"}).is_whole());
    CHECK(f2::CylinderUnion::cylinder("ab").complement().complement() == f2::CylinderUnion::cylinder("ab"));
    CHECK(f2::CylinderUnion::cylinder("a").contains_cylinder("aab"));
    CHECK_FALSE(f2::CylinderUnion::cylinder("ab").contains_cylinder("a"));
    CHECK(f2::CylinderUnion::of({"aa", "ab", "aB"}).contains_cylinder("a"));
}

TEST_CASE("act_set worked examples against the brute-force membership oracle") {
    const auto g = F("A");
    const auto img1 = act_set(g, ClosedSet::cylinder("A"));
    CHECK(img1.cylinders() == f2::CylinderUnion::cylinder("AA"));
    const auto img2 = act_set(g, ClosedSet::cylinder("a"));
    CHECK(img2.cylinders() == f2::CylinderUnion::of({"a", "b", "B"}));

    for (const auto& v : f2::sphere(3)) {
        const f2::End p = f2::End::make(v, std::string(1, v.back()));
        CHECK(img1.cylinders().contains(p) == image_membership_oracle(g, f2::CylinderUnion::cylinder("A"), p));
        CHECK(img2.cylinders().contains(p) == image_membership_oracle(g, f2::CylinderUnion::cylinder("a"), p));
    }
    CHECK(act_set(GroupElement::identity(Model::free_group), img2).same_as(img2));
}

TEST_CASE("act_set commutes with membership exhaustively over depth <= 4 cylinders") {
    RandomStream rng(2024, 1);
    const ModelSpec spec = ModelSpec::defaults(Model::free_group);
    std::vector<std::string> words;
    for (std::size_t d = 1; d <= 4; ++d)
        for (auto& w : f2::sphere(d)) words.push_back(w);
    std::vector<f2::End> probes;
    for (const auto& v : f2::sphere(7)) probes.push_back(f2::End::make(v, std::string(1, v.back())));

    std::size_t checks = 0;
    for (const auto& w : words) {
        const auto g = random_element(spec, rng, 1 + rng.below(5));
        const auto s = ClosedSet::cylinder(w);
        const auto img = act_set(g, s);
        for (std::size_t i = 0; i < probes.size(); i += 37) {
            const BoundaryPoint p(probes[i]);
            CHECK(s.contains(p) == img.contains(act(g, p)));
            CHECK(img.cylinders().contains(probes[i]) == image_membership_oracle(g, s.cylinders(), probes[i]));
            ++checks;
        }
    }
    CHECK(checks > 10000);
}

TEST_CASE("act_set commutes with membership on the circle") {
    RandomStream rng(99, 2);
    const ModelSpec spec = ModelSpec::defaults(Model::modular);
    for (int i = 0; i < 1000; ++i) {
        const auto g = random_element(spec, rng, 1 + rng.below(4));
        const auto s = ClosedSet::arc(rng.uniform() * psl2::kTwoPi, 0.05 + rng.uniform() * 2.0);
        const auto p = random_boundary_point(Model::modular, rng);
        const double dist = psl2::angular_distance(p.point().angle(), s.arcs().arcs()[0].start);
        const double dist2 = psl2::angular_distance(p.point().angle(), s.arcs().arcs()[0].end());
        if (std::min(dist, dist2) < 1e-6) continue;  // too close to an endpoint to be decided in double precision
        CHECK(s.contains(p) == act_set(g, s).contains(act(g, p)));
    }
}

TEST_CASE("action is a left action") {
    RandomStream rng(7, 3);
    for (Model m : {Model::free_group, Model::modular}) {
        const ModelSpec spec = ModelSpec::defaults(m);
        for (int i = 0; i < 1000; ++i) {
            const auto g = random_element(spec, rng, rng.below(6));
            const auto h = random_element(spec, rng, rng.below(6));
            const auto p = random_boundary_point(m, rng);
            const auto lhs = act(g, act(h, p));
            const auto rhs = act(g * h, p);
            if (m == Model::free_group) {
                CHECK(lhs.end() == rhs.end());
            } else {
                CHECK(psl2::angular_distance(lhs.point().angle(), rhs.point().angle()) <= 1e-9);
            }
        }
    }
}

TEST_CASE("PSL2Z matrices are sign-normalized with determinant one") {
    const auto m = psl2::Matrix(-1, 0, 0, -1);
    CHECK(m.is_identity());
    CHECK(psl2::Matrix::parse("[0,1,-1,0]") == psl2::Matrix::named('S'));
    CHECK((psl2::Matrix::named('S') * psl2::Matrix::named('S')).is_identity());
    CHECK(psl2::Matrix::parse("TL") == psl2::Matrix::named('H'));
    CHECK((psl2::Matrix::named('H') * psl2::Matrix::named('h')).is_identity());
    CHECK_THROWS_AS(psl2::Matrix(1, 1, 1, 1), Error);
}

TEST_CASE("word balls have the free-group growth") {
    const auto spec = ModelSpec::defaults(Model::free_group);
    for (std::size_t r = 0; r <= 4; ++r) {
        std::size_t expected = 0;
        for (std::size_t k = 0; k <= r; ++k) expected += f2::sphere_size(k);
        CHECK(word_ball(spec, r).size() == expected);
    }
    const auto ball = word_ball(spec, 1);
    CHECK(ball[0].label.empty());
    CHECK(ball[1].label == "A");  // sphere order is by label
}

TEST_CASE("convergence_subsequence: powers of a are north-south") {
    std::vector<GroupElement> seq;
    for (int n = 1; n <= 30; ++n) seq.push_back(F("a").pow(n));
    std::vector<BoundaryPoint> probe;
    for (const char* s : {"(b)", "(B)", "b(a)", "B(A)", "ab(a)", "Ab(B)", "bA(b)", "(ab)", "B(aB)"}) probe.push_back(E(s));
    const auto r = convergence_subsequence(seq, probe);
    REQUIRE(r.conclusive);
    CHECK(r.attracting->contains(E("(a)")));
    CHECK(r.attracting->depth >= 20);
    CHECK(r.repelling->contains(E("(A)")));
    CHECK(r.attracting->representative().same_as(E("(a)")));
}

TEST_CASE("convergence_subsequence: identity powers are inconclusive") {
    std::vector<GroupElement> seq(20, GroupElement::identity(Model::free_group));
    std::vector<BoundaryPoint> probe;
    for (const char* s : {"(b)", "(B)", "(a)", "(A)", "ab(a)", "Ab(B)", "bA(b)", "Ba(B)"}) probe.push_back(E(s));
    CHECK_FALSE(convergence_subsequence(seq, probe).conclusive);
}

TEST_CASE("convergence_subsequence: hyperbolic H^n converges to its eigendirections") {
    const auto H = GroupElement::parse(Model::modular, "H");
    std::vector<GroupElement> seq;
    for (int n = 1; n <= 25; ++n) seq.push_back(H.pow(n));
    RandomStream rng(5, 5);
    std::vector<BoundaryPoint> probe;
    for (int i = 0; i < 10; ++i) probe.push_back(random_boundary_point(Model::modular, rng));
    const auto r = convergence_subsequence(seq, probe);
    REQUIRE(r.conclusive);
    // fixed points of x -> (2x+1)/(x+1) solve x^2 - x - 1 = 0
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0, conj = (1.0 - std::sqrt(5.0)) / 2.0;
    CHECK(psl2::angular_distance(r.attracting->centre, psl2::Point::from_real(golden).angle()) < 1e-6);
    CHECK(psl2::angular_distance(r.repelling->centre, psl2::Point::from_real(conj).angle()) < 1e-6);
    const auto [attr, rep] = psl2::hyperbolic_fixed_points(H.matrix());
    CHECK(attr.same_as(psl2::Point::from_real(golden)));
    CHECK(rep.same_as(psl2::Point::from_real(conj)));
}

TEST_CASE("north-south threshold for powers of a, per cylinder depth") {
    // A probe point with j leading A's lands in C(a^k) under a^n once n >= k + j.
    RandomStream rng(11, 4);
    std::vector<f2::End> probe;
    std::size_t max_lead = 0;
    while (probe.size() < 50) {
        const auto p = random_boundary_point(Model::free_group, rng).end();
        if (p.block() == "A") continue;  // the repelling point itself
        std::size_t lead = 0;
        while (p.letter(lead) == 'A') ++lead;
        max_lead = std::max(max_lead, lead);
        probe.push_back(p);
    }
    for (std::size_t k = 1; k <= 8; ++k) {
        const std::size_t n = k + max_lead;
        const auto g = F("a").pow(static_cast<long long>(n)).word();
        for (const auto& p : probe) CHECK(p.act(g).starts_with(std::string(k, 'a')));
    }
}

TEST_CASE("closed sets must be proper and nonempty") {
    CHECK_THROWS_AS(ClosedSet(f2::CylinderUnion::whole()), Error);
    CHECK_THROWS_AS(ClosedSet(f2::CylinderUnion()), Error);
    CHECK(disjoint(ClosedSet::cylinder("a"), ClosedSet::cylinder("A")));
    CHECK_FALSE(disjoint(ClosedSet::cylinder("a"), ClosedSet::cylinder("ab")));
    CHECK(interiors_cover(ClosedSet::cylinder("a"), ClosedSet(f2::CylinderUnion::of({"A", "b", "B"}))));
}
