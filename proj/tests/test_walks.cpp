#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "convwalk/error.hpp"
#include "convwalk/walks.hpp"

using namespace convwalk;

namespace {

GroupElement F(const char* s) { return GroupElement::parse(Model::free_group, s); }
BoundaryPoint E(const char* s) { return BoundaryPoint::parse(Model::free_group, s); }

StepDistribution uniform_f2() { return StepDistribution::uniform(Model::free_group); }

template <class Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode(0);
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Philox4x32Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Philox4x32Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("step distributions: validation and generation") {
    CHECK(code_of([] { StepDistribution({{F("a"), 0.5}, {F("A"), 0.4}}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { StepDistribution({{F("a"), 1.0}}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { StepDistribution({{F("a"), 0.5}, {F("a"), 0.5}}, "x"); }) == ErrorCode::invalid_argument);
    CHECK_NOTHROW(StepDistribution::point_mass(F("a")));
    CHECK_NOTHROW(StepDistribution::uniform(Model::modular));
    CHECK(uniform_f2().max_word_length() == 1);

    CHECK(generates_group(Model::free_group, {F("a"), F("b")}));
    CHECK(generates_group(Model::free_group, {F("a"), F("ab")}));
    CHECK_FALSE(generates_group(Model::free_group, {F("a"), F("bb")}));
    CHECK_FALSE(generates_group(Model::free_group, {F("a")}));
    CHECK_FALSE(generates_group(Model::free_group, {F("ab"), F("ba")}));
    const auto q = [](const char* s) { return GroupElement::parse(Model::modular, s); };
    CHECK(generates_group(Model::modular, {q("S"), q("T")}));
    CHECK(generates_group(Model::modular, {q("[2,1,1,1]"), q("T")}));
    CHECK_FALSE(generates_group(Model::modular, {q("T")}));
}

TEST_CASE("sample paths") {
    const auto mu = uniform_f2();
    CHECK(sample_path(mu, 0, 1).products.size() == 1);
    CHECK(sample_path(mu, 0, 1).products[0].is_identity());
    CHECK(sample_path(StepDistribution::point_mass(F("a")), 5, 1).products.back() == F("aaaaa"));

    const auto p = sample_path(mu, 10000, 3);
    const double speed = double(p.products.back().word_length()) / 10000.0;
    CHECK(std::abs(speed - 0.5) < 0.03);
    const auto again = sample_path(mu, 10000, 3);
    CHECK(again.products.back() == p.products.back());
}

TEST_CASE("walk limits") {
    const Triple x = default_basepoint(Model::free_group);
    const auto lim = walk_boundary_limit(sample_path(StepDistribution::point_mass(F("a")), 200, 1), x);
    REQUIRE(lim);
    CHECK(lim->representative().same_as(E("(a)")));
    CHECK_FALSE(walk_boundary_limit(sample_path(uniform_f2(), 10, 1), x));

    const auto mu = uniform_f2();
    HittingOptions opt;
    const auto fast = sample_limits(mu, 100, 200, 9, opt);
    for (std::size_t i = 0; i < 100; ++i) {
        const auto path = sample_path(mu, 200, 9, i);
        const auto slow = walk_boundary_limit(path, x);
        REQUIRE(bool(slow) == bool(fast[i]));
        if (!slow) continue;
        CHECK(slow->word == fast[i]->word);
        CHECK(path.products.back().word().letters().starts_with(slow->word));
    }

    // circle walks settle as well
    const auto circle = sample_limits(StepDistribution::uniform(Model::modular), 200, 200, 4, opt);
    std::size_t conclusive = 0;
    for (const auto& l : circle) conclusive += l ? 1 : 0;
    CHECK(conclusive >= 198);
}

TEST_CASE("hitting measure matches the tree harmonic measure") {
    HittingOptions opt;
    opt.depth = 2;
    const auto nu = estimate_hitting_measure(uniform_f2(), 10000, 200, 17, opt);
    CHECK(nu.conclusive + nu.inconclusive == 10000);
    CHECK(std::abs(nu.total() - 1.0) < 1e-12);
    for (const char* x : {"a", "A", "b", "B"}) CHECK(std::abs(nu.cylinder_mass(x) - 0.25) <= 0.02);
    for (const auto& w : f2::sphere(2)) CHECK(std::abs(nu.cylinder_mass(w) - 1.0 / 12.0) <= 0.01);
    CHECK(code_of([&] { nu.cylinder_mass("aba"); }) == ErrorCode::insufficient_resolution);

    opt.depth = 3;
    const auto point = estimate_hitting_measure(StepDistribution::point_mass(F("a")), 100, 200, 1, opt);
    CHECK(point.cylinder_mass("aaa") == doctest::Approx(1.0));

    HittingOptions strict;
    strict.limit.min_depth = 60;
    CHECK(code_of([&] { estimate_hitting_measure(uniform_f2(), 200, 60, 1, strict); }) == ErrorCode::inconclusive);

    HittingOptions arcs;
    arcs.arc_bins = 16;
    const auto circle = estimate_hitting_measure(StepDistribution::uniform(Model::modular), 500, 200, 2, arcs);
    CHECK(circle.bin_count() == 16);
    CHECK(std::abs(circle.total() - 1.0) < 1e-12);
}

TEST_CASE("tree harmonic oracle") {
    const auto nu = EmpiricalMeasure::tree_harmonic(3);
    CHECK(nu.bin_count() == 36);
    CHECK(nu.cylinder_mass("a") == doctest::Approx(0.25));
    CHECK(nu.cylinder_mass("ab") == doctest::Approx(1.0 / 12.0));
    CHECK(nu.mass(f2::CylinderUnion::cylinder("A").complement()) == doctest::Approx(0.75));
    CHECK(code_of([] { EmpiricalMeasure::from_masses(Model::free_group, 1, {0.5, 0.5, 0.0, 0.1}); }) ==
          ErrorCode::invalid_argument);
}

TEST_CASE("stationarity defect") {
    const auto mu = uniform_f2();
    CHECK(check_stationarity(EmpiricalMeasure::tree_harmonic(3), mu).tv <= 1e-12);
    CHECK(check_stationarity(EmpiricalMeasure::tree_harmonic(6), mu).tv <= 1e-12);
    CHECK(check_stationarity(EmpiricalMeasure::tree_harmonic(3), mu).tv_depth == 2);

    // identity pushforward
    const auto still = StepDistribution::point_mass(GroupElement::identity(Model::free_group));
    std::vector<double> skewed(f2::sphere_size(2), 0.0);
    skewed[0] = 0.7;
    skewed[5] = 0.3;
    CHECK(check_stationarity(EmpiricalMeasure::from_masses(Model::free_group, 2, skewed), still).tv == 0.0);

    // uniform on depth-1 and depth-2 cylinders, lopsided below that
    std::vector<double> lopsided(f2::sphere_size(3), 0.0);
    const auto words = f2::sphere(3);
    for (std::size_t i = 0; i < words.size(); ++i)
        if (i % 3 == 0) lopsided[i] = 1.0 / 12.0;
    const auto nu = EmpiricalMeasure::from_masses(Model::free_group, 3, lopsided);
    CHECK(check_stationarity(nu, mu, 1).tv <= 1e-12);
    CHECK(check_stationarity(nu, mu, 2).tv > 0.1);

    CHECK(code_of([&] { check_stationarity(EmpiricalMeasure::tree_harmonic(1), mu); }) ==
          ErrorCode::insufficient_resolution);
    CHECK(code_of([&] { check_stationarity(nu, mu, 3); }) == ErrorCode::insufficient_resolution);

    HittingOptions opt;
    opt.depth = 3;
    const double small = check_stationarity(estimate_hitting_measure(mu, 1000, 200, 5, opt), mu).tv;
    const double large = check_stationarity(estimate_hitting_measure(mu, 10000, 200, 5, opt), mu).tv;
    CHECK(large < small);
    CHECK(large <= 0.03);
}

TEST_CASE("hitting measure is equivariant") {
    const auto mu = uniform_f2();
    HittingOptions opt;
    opt.depth = 3;
    const auto nu_e = estimate_hitting_measure(mu, 5000, 200, 21, opt);
    for (const char* g : {"ab", "B", "aab"}) {
        opt.start = F(g);
        const auto nu_g = estimate_hitting_measure(mu, 5000, 200, 22, opt);
        const auto a = f2::CylinderUnion::cylinder("a");
        const double lhs = nu_g.mass(a);
        const double rhs = nu_e.mass(a.image(F(g).inverse().word()));
        const double se = std::sqrt(lhs * (1 - lhs) / 5000 + rhs * (1 - rhs) / 5000);
        CHECK(std::abs(lhs - rhs) <= 3 * se + 1e-12);
    }
}

TEST_CASE("finite-boundary mass") {
    const auto mu = uniform_f2();
    const auto sys = AnnulusSystem::build(ModelSpec::defaults(Model::free_group), Annulus::default_for(Model::free_group), 2);
    const auto x = default_basepoint(Model::free_group);
    const auto fb = estimate_finite_boundary_mass(mu, sys, x, 1, 1000, 200, 3);
    CHECK(fb.conclusive + fb.inconclusive == 1000);
    CHECK(fb.fraction == doctest::Approx(double(fb.passing) / double(fb.conclusive)));
    CHECK_FALSE(fb.saturated);

    const auto big = estimate_finite_boundary_mass(mu, sys, x, sys.longest_chain(), 200, 200, 3);
    CHECK(big.saturated);
    CHECK(big.fraction == 1.0);

    // the surrogate shrinks as the truncation grows
    const auto sys4 = AnnulusSystem::build(ModelSpec::defaults(Model::free_group), Annulus::default_for(Model::free_group), 4);
    CHECK(estimate_finite_boundary_mass(mu, sys4, x, 1, 1000, 200, 3).fraction < fb.fraction);
}

TEST_CASE("circle walk limits avoid cusps") {
    CHECK(near_cusp(BoundaryPoint::parse(Model::modular, "inf"), 10, 1e-6));
    CHECK(near_cusp(BoundaryPoint::parse(Model::modular, "-3/7"), 10, 1e-6));
    CHECK_FALSE(near_cusp(BoundaryPoint::parse(Model::modular, "0.6180339887"), 10, 1e-6));
    const auto limits = sample_limits(StepDistribution::uniform(Model::modular), 500, 200, 8);
    for (const auto& l : limits)
        if (l) CHECK_FALSE(near_cusp(l->representative(), 10, 1e-6));
}

TEST_CASE("dirichlet extension") {
    const auto mu = uniform_f2();
    const auto one = dirichlet_extension(BinFunction::one(), F("ab"), mu, 500, 200, 1);
    CHECK(one.mean == 1.0);
    CHECK(one.standard_error == 0.0);

    const auto f = BinFunction::indicator(ClosedSet::cylinder("a"));
    double previous = -1.0;
    for (int k = 1; k <= 10; ++k) {
        const double h = dirichlet_extension(f, F("a").pow(k), mu, 2000, 200, 4).mean;
        CHECK(h >= previous);
        previous = h;
    }
    CHECK(previous > 0.999);
    CHECK(dirichlet_extension(f, F("a"), mu, 2000, 200, 4).mean < dirichlet_extension(f, F("aaa"), mu, 2000, 200, 4).mean);

    RandomStream rng(31, 0);
    for (int i = 0; i < 3; ++i) {
        const auto g = random_element(ModelSpec::defaults(Model::free_group), rng, 1 + rng.below(4));
        const auto check = harmonicity_check(f, g, mu, 4000, 200, 40 + i);
        CHECK(check.gap <= 3 * check.joint_standard_error);
    }
}

TEST_CASE("cesaro proximality") {
    const auto mu = uniform_f2();
    const auto profile = cesaro_proximality(E("(a)"), E("(b)"), 0.25, mu, {10, 50, 200}, 10000, 6);
    REQUIRE(profile.size() == 3);
    CHECK(profile[0].probability > profile[1].probability);
    CHECK(profile[1].probability > profile[2].probability);
    CHECK(profile[2].probability <= 0.1);

    // a^k b^inf and a^k B^inf are 2^-k apart: only k = 1 is far
    const auto drift = cesaro_proximality(E("(b)"), E("(B)"), 0.25, StepDistribution::point_mass(F("a")), {4, 100},
                                          10000, 6);
    CHECK(std::abs(drift[0].probability - 0.25) <= 4 * drift[0].standard_error);
    CHECK(drift[1].probability < 0.03);

    CHECK(code_of([&] { cesaro_proximality(E("(a)"), E("(a)"), 0.25, mu, {10}, 100, 1); }) ==
          ErrorCode::invalid_argument);
}

TEST_CASE("strong almost transitivity probe") {
    const auto nu = EmpiricalMeasure::tree_harmonic(7);
    const auto spec = ModelSpec::defaults(Model::free_group);

    const auto all = sat_probe(f2::CylinderUnion::whole(), 0.1, 3, nu, spec);
    REQUIRE(all);
    CHECK(all->element.is_identity());

    // a^-1 C(a) is the complement of C(a^-1), of mass 3/4
    const auto w = sat_probe(f2::CylinderUnion::cylinder("a"), 0.3, 6, nu, spec);
    REQUIRE(w);
    CHECK(w->element == F("A"));
    CHECK(w->mass == doctest::Approx(0.75));

    CHECK_FALSE(sat_probe(f2::CylinderUnion::cylinder("a"), 1e-9, 6, nu, spec));
    CHECK(code_of([&] { sat_probe(f2::CylinderUnion::cylinder("a"), 0.3, 6, EmpiricalMeasure::tree_harmonic(3), spec); }) ==
          ErrorCode::insufficient_resolution);
}

TEST_CASE("results do not depend on the worker count") {
    const auto mu = uniform_f2();
    HittingOptions one, four;
    one.depth = four.depth = 3;
    four.workers = 4;
    CHECK(estimate_hitting_measure(mu, 2000, 200, 13, one).masses() ==
          estimate_hitting_measure(mu, 2000, 200, 13, four).masses());

    const auto c1 = cesaro_proximality(E("(a)"), E("(b)"), 0.25, mu, {10, 50}, 2000, 6, 1);
    const auto c4 = cesaro_proximality(E("(a)"), E("(b)"), 0.25, mu, {10, 50}, 2000, 6, 4);
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1[i].probability == c4[i].probability);

    const auto sys = AnnulusSystem::build(ModelSpec::defaults(Model::free_group), Annulus::default_for(Model::free_group), 2);
    const auto x = default_basepoint(Model::free_group);
    CHECK(estimate_finite_boundary_mass(mu, sys, x, 1, 500, 200, 3, one).passing ==
          estimate_finite_boundary_mass(mu, sys, x, 1, 500, 200, 3, four).passing);
}
