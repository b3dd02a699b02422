#include "convwalk/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <unistd.h>

#include "convwalk/cli.hpp"
#include "convwalk/error.hpp"
#include "convwalk/parallel.hpp"
#include "convwalk/quasimetric.hpp"
#include "convwalk/walks.hpp"

namespace convwalk {

namespace {

constexpr std::uint64_t kSeed = 20240601;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double v) { return cli::format_number(v); }

AnnulusSystem system_for(Model m, std::size_t r) {
    return AnnulusSystem::build(ModelSpec::defaults(m), Annulus::default_for(m), r);
}

BoundaryPoint E(const char* s) { return BoundaryPoint::parse(Model::free_group, s); }

struct Outcome {
    bool pass;
    std::string detail;
};

// 1. rho axioms and monotonicity in the truncation
Outcome quasimetric_axioms(int) {
    const auto start = Clock::now();
    const auto sys = system_for(Model::free_group, 2);
    std::size_t asym = 0, nonzero_diag = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        RandomStream rng(kSeed + 1, i);
        const auto x = random_triple(Model::free_group, rng), y = random_triple(Model::free_group, rng);
        asym += rho(x, y, sys).value != rho(y, x, sys).value ? 1 : 0;
        nonzero_diag += rho(x, x, sys).value != 0 ? 1 : 0;
    }
    std::vector<AnnulusSystem> systems;
    for (std::size_t r = 0; r <= 3; ++r) systems.push_back(system_for(Model::free_group, r));
    std::size_t non_monotone = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        RandomStream rng(kSeed + 2, i);
        const PointSet k{random_boundary_point(Model::free_group, rng), random_boundary_point(Model::free_group, rng)};
        const PointSet l{random_boundary_point(Model::free_group, rng), random_boundary_point(Model::free_group, rng)};
        int previous = 0;
        for (const auto& s : systems) {
            const int v = s.crossratio(k, l);
            non_monotone += v < previous ? 1 : 0;
            previous = v;
        }
    }
    const double t = seconds_since(start);
    std::ostringstream os;
    os << "asymmetric pairs " << asym << "/1000, rho(x,x) != 0 in " << nonzero_diag << "/1000, non-monotone probes "
       << non_monotone << "/100 over radii 0..3";
    return {asym == 0 && nonzero_diag == 0 && non_monotone == 0 && t < 120.0, os.str()};
}

// 2. strict partial order on every cached annulus
Outcome order_relation(int) {
    std::ostringstream os;
    bool ok = true;
    for (Model m : {Model::free_group, Model::modular}) {
        const auto sys = system_for(m, 2);
        const std::size_t n = sys.size();
        std::size_t reflexive = 0, symmetric = 0, intransitive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            reflexive += sys.less(i, i) ? 1 : 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && sys.less(i, j) && sys.less(j, i)) ++symmetric;
                if (!sys.less(i, j)) continue;
                for (std::size_t k = 0; k < n; ++k)
                    if (sys.less(j, k) && !sys.less(i, k)) ++intransitive;
            }
        }
        ok = ok && reflexive == 0 && symmetric == 0 && intransitive == 0;
        os << model_name(m) << ": " << n << " annuli, " << reflexive << " reflexive, " << symmetric
           << " symmetric pairs, " << intransitive << " intransitive triples; ";
    }
    return {ok, os.str()};
}

// 3. worked chain against exhaustive search
Outcome worked_crossratio(int) {
    const auto sys = system_for(Model::free_group, 1);
    const PointSet k{E("AA(b)"), E("AAA(b)")}, l{E("aa(b)"), E("aaa(b)")};
    const auto& es = sys.entries();
    std::function<int(std::size_t)> from = [&](std::size_t i) {
        int best = annulus_less_set(es[i].annulus, l) ? 1 : 0;
        for (std::size_t j = 0; j < es.size(); ++j)
            if (annulus_less(es[i].annulus, es[j].annulus))
                if (const int t = from(j); t > 0) best = std::max(best, t + 1);
        return best;
    };
    int oracle = 0;
    for (std::size_t i = 0; i < es.size(); ++i)
        if (set_less(k, es[i].annulus)) oracle = std::max(oracle, from(i));
    const int value = sys.crossratio(k, l);
    return {value == oracle && value == 3,
            "DAG value " + std::to_string(value) + ", brute-force oracle " + std::to_string(oracle) + ", expected 3"};
}

// 4. walk convergence
Outcome walk_convergence(int workers) {
    const auto start = Clock::now();
    HittingOptions opt;
    opt.workers = workers;
    const auto limits = sample_limits(StepDistribution::uniform(Model::free_group), 1000, 200, kSeed + 4, opt);
    std::size_t conclusive = 0;
    for (const auto& l : limits) conclusive += l ? 1 : 0;
    const double t = seconds_since(start);
    return {conclusive >= 990 && t < 60.0,
            std::to_string(conclusive) + "/1000 conclusive (need >= 990), " + num(std::round(t * 100) / 100) + " s"};
}

EmpiricalMeasure acceptance_measure(int workers) {
    HittingOptions opt;
    opt.depth = 3;
    opt.workers = workers;
    return estimate_hitting_measure(StepDistribution::uniform(Model::free_group), 10000, 200, kSeed + 5, opt);
}

// 5. hitting measure vs the tree harmonic measure
Outcome hitting_measure(int workers) {
    const auto start = Clock::now();
    const auto nu = acceptance_measure(workers);
    double worst1 = 0, worst2 = 0;
    for (const auto& w : f2::sphere(1)) worst1 = std::max(worst1, std::abs(nu.cylinder_mass(w) - 0.25));
    for (const auto& w : f2::sphere(2)) worst2 = std::max(worst2, std::abs(nu.cylinder_mass(w) - 1.0 / 12.0));
    const double t = seconds_since(start);
    return {worst1 <= 0.02 && worst2 <= 0.01 && t < 120.0,
            "max |nu(C(x)) - 1/4| = " + num(worst1) + ", max |nu(C(w)) - 1/12| = " + num(worst2) + " over 10^4 paths"};
}

// 6. stationarity of the estimate and of the oracle
Outcome stationarity(int workers) {
    const auto mu = StepDistribution::uniform(Model::free_group);
    const auto sampled = check_stationarity(acceptance_measure(workers), mu);
    const auto oracle = check_stationarity(EmpiricalMeasure::tree_harmonic(3), mu);
    return {sampled.tv <= 0.03 && oracle.tv <= 1e-12,
            "sampled TV " + num(sampled.tv) + " (depth-3 bins, exact level " + std::to_string(sampled.tv_depth) +
                "), oracle TV " + num(oracle.tv)};
}

// 7. disjointness of boundary balls for far-apart triples
Outcome ball_disjointness(int workers) {
    const auto sys = system_for(Model::free_group, 2);
    const auto spec = ModelSpec::defaults(Model::free_group);
    const auto x0 = default_basepoint(Model::free_group);
    const int r = 1;
    auto violations = [&](int threshold, std::uint64_t seed) {
        // pairs of orbit triples g x0, h x0 with rho >= threshold
        std::vector<std::pair<Triple, Triple>> pairs;
        RandomStream pick(seed, 0);
        while (pairs.size() < 100) {
            auto x = act_triple(random_element(spec, pick, pick.below(7)), x0);
            auto y = act_triple(random_element(spec, pick, pick.below(7)), x0);
            if (rho(x, y, sys).value >= threshold) pairs.emplace_back(std::move(x), std::move(y));
        }
        std::vector<std::size_t> bad(pairs.size(), 0);
        parallel_for(pairs.size(), workers, [&](std::size_t i) {
            RandomStream rng(seed, i + 1);
            const BoundaryBallIndicator bx(pairs[i].first, r), by(pairs[i].second, r);
            for (int k = 0; k < 1000; ++k) {
                const auto p = random_boundary_point(Model::free_group, rng);
                if (in_boundary_ball_necessary(p, bx, sys) && in_boundary_ball_necessary(p, by, sys)) ++bad[i];
            }
        });
        std::size_t pairs_hit = 0;
        for (auto b : bad) pairs_hit += b ? 1 : 0;
        return pairs_hit;
    };
    const auto stated = violations(r + 2, kSeed + 7);
    const auto doubled = violations(2 * r + 2, kSeed + 7);
    return {stated == 0, "rho >= R+2: " + std::to_string(stated) +
                             "/100 pairs with a point passing both indicators; with rho >= 2R+2: " +
                             std::to_string(doubled) + "/100"};
}

// 8. cusp vs conical point profiles on PSL2Z
Outcome boundary_profiles(int) {
    const auto spec = ModelSpec::defaults(Model::modular);
    const auto gen = Annulus::default_for(Model::modular);
    const auto a = BoundaryPoint::parse(Model::modular, "-1/2"), b = BoundaryPoint::parse(Model::modular, "-1/3");
    const auto cusp = pair_crossratio_to_point(a, b, BoundaryPoint::parse(Model::modular, "inf"), spec, gen, {2, 3, 4});
    const auto golden = pair_crossratio_to_point(a, b, BoundaryPoint::parse(Model::modular, "1.6180339887498949"), spec,
                                                 gen, {1, 2, 3, 4});
    bool constant = true, increasing = true;
    std::string c_text, g_text;
    for (std::size_t i = 0; i < cusp.size(); ++i) {
        constant = constant && cusp[i].value == cusp[0].value;
        c_text += (i ? "," : "") + std::to_string(cusp[i].value);
    }
    for (std::size_t i = 0; i < golden.size(); ++i) {
        if (i) increasing = increasing && golden[i].value > golden[i - 1].value;
        g_text += (i ? "," : "") + std::to_string(golden[i].value);
    }
    return {constant && increasing, "cusp profile (radii 2..4) " + c_text + "; golden-point profile (radii 1..4) " + g_text};
}

// 9. finite-boundary mass surrogate
Outcome finite_boundary(int workers) {
    HittingOptions opt;
    opt.workers = workers;
    const auto sys = system_for(Model::free_group, 2);
    const auto fb = estimate_finite_boundary_mass(StepDistribution::uniform(Model::free_group), sys,
                                                  default_basepoint(Model::free_group), 1, 1000, 200, kSeed + 9, opt);
    return {fb.fraction <= 0.05, "indicator-passing fraction " + num(fb.fraction) + " (" + std::to_string(fb.passing) +
                                     "/" + std::to_string(fb.conclusive) + "), need <= 0.05"};
}

// 10. harmonicity of the Dirichlet extension
Outcome harmonicity(int workers) {
    HittingOptions opt;
    opt.workers = workers;
    const auto mu = StepDistribution::uniform(Model::free_group);
    const auto f = BinFunction::indicator(ClosedSet::cylinder("a"));
    RandomStream rng(kSeed + 10, 0);
    std::size_t failures = 0;
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto g = random_element(ModelSpec::defaults(Model::free_group), rng, 1 + rng.below(5));
        const auto h = harmonicity_check(f, g, mu, 10000, 200, derive_seed(kSeed + 10, std::uint64_t(i) + 1), opt);
        const double ratio = h.joint_standard_error > 0 ? h.gap / h.joint_standard_error : (h.gap == 0 ? 0.0 : 1e9);
        worst = std::max(worst, ratio);
        failures += ratio <= 3.0 ? 0 : 1;
    }
    return {failures == 0,
            std::to_string(10 - failures) + "/10 elements within 3 joint SE, worst gap " + num(worst) + " SE"};
}

// 11. Cesaro proximality profile
Outcome cesaro(int workers) {
    const auto profile = cesaro_proximality(E("(a)"), E("(b)"), 0.25, StepDistribution::uniform(Model::free_group),
                                            {10, 50, 200}, 10000, kSeed + 11, workers);
    const bool ok = profile[0].probability > profile[1].probability &&
                    profile[1].probability > profile[2].probability && profile[2].probability <= 0.1;
    return {ok, "P(n=10) " + num(profile[0].probability) + ", P(n=50) " + num(profile[1].probability) + ", P(n=200) " +
                    num(profile[2].probability)};
}

// 12. CSV outputs do not depend on --workers
Outcome determinism(int) {
    namespace fs = std::filesystem;
    const std::vector<std::pair<std::string, std::string>> configs{
        {"walk", R"J({"model":"F2","seed":5,"n":200,"trials":300})J"},
        {"walk", R"J({"model":"PSL2Z","seed":5,"n":200,"trials":200,"walk":{"log_steps":true}})J"},
        {"measure", R"J({"model":"F2","seed":6,"n":200,"trials":2000,"bins":{"depth":3},
                        "measure":{"finite_boundary":{"R":1},"sat_probe":{"set":["a"],"eps":0.3,"radius":2},
                                   "dirichlet":{"set":["a"],"elements":["e","ab"],"harmonicity":true},
                                   "cesaro":{"x":"(a)","y":"(b)"}}})J"},
        {"measure", R"J({"model":"PSL2Z","seed":6,"n":200,"trials":500,"bins":{"arc_bins":64}})J"},
        {"geometry", R"J({"model":"F2","seed":7,"ball_radius":2,
                         "geometry":{"hyperbolicity":{"samples":300},"loxodromic":{"element":"ab","n_max":6}}})J"},
    };
    const fs::path root = fs::temp_directory_path() / ("convwalk-determinism-" + std::to_string(::getpid()));
    std::size_t files = 0, differing = 0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const auto cfg = cli::parse_config(nlohmann::json::parse(configs[c].second), configs[c].first);
        std::vector<std::string> names;
        for (int w : {1, 4}) {
            const auto out = cli::run_command(cfg, w);
            cli::write_run(root / (std::to_string(c) + "-w" + std::to_string(w)), cfg, w, out);
            if (w == 1)
                for (const auto& t : out.tables) names.push_back(t.name + ".csv");
        }
        auto slurp = [](const fs::path& p) {
            std::ifstream f(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(f), {});
        };
        for (const auto& n : names) {
            ++files;
            const auto a = slurp(root / (std::to_string(c) + "-w1") / n);
            const auto b = slurp(root / (std::to_string(c) + "-w4") / n);
            differing += (a != b || a.empty()) ? 1 : 0;
        }
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    return {differing == 0 && files > 0,
            std::to_string(files - differing) + "/" + std::to_string(files) + " CSV files byte-identical for workers 1 vs 4"};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
    struct Criterion {
        int id;
        const char* title;
        Outcome (*run)(int);
    };
    const std::vector<Criterion> all{
        {1, "quasimetric axioms", quasimetric_axioms},
        {2, "order relation", order_relation},
        {3, "worked crossratio", worked_crossratio},
        {4, "walk convergence", walk_convergence},
        {5, "hitting measure vs oracle", hitting_measure},
        {6, "stationarity", stationarity},
        {7, "ball disjointness", ball_disjointness},
        {8, "finite vs infinite boundary profiles", boundary_profiles},
        {9, "finite-boundary mass", finite_boundary},
        {10, "Dirichlet harmonicity", harmonicity},
        {11, "Cesaro proximality", cesaro},
        {12, "determinism across workers", determinism},
    };
    std::vector<CriterionResult> results;
    for (const auto& c : all) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), c.id) == opt.only.end()) continue;
        CriterionResult r{c.id, c.title, false, 0.0, ""};
        const auto start = Clock::now();
        try {
            const auto o = c.run(opt.workers);
            r.pass = o.pass;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = seconds_since(start);
        if (opt.on_result) opt.on_result(r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace convwalk
