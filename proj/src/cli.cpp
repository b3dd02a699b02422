#include "convwalk/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "convwalk/acceptance.hpp"
#include "convwalk/error.hpp"
#include "convwalk/quasimetric.hpp"

namespace convwalk::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) { fail(ErrorCode::config, where + ": " + what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) bad(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            bad(where, "unknown field '" + it.key() + "'");
}

std::size_t get_size(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) bad(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

double get_double(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) bad(where, "expected true or false");
    return j.get<bool>();
}

std::vector<std::string> get_strings(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) out.push_back(get_string(e, where));
    return out;
}

std::vector<std::size_t> get_sizes(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) bad(where, "expected a nonempty array of nonnegative integers");
    std::vector<std::size_t> out;
    for (const auto& e : j) out.push_back(get_size(e, where));
    return out;
}

std::vector<BoundaryPoint> points(Model m, const std::vector<std::string>& texts) {
    std::vector<BoundaryPoint> out;
    for (const auto& t : texts) out.push_back(BoundaryPoint::parse(m, t));
    return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string join_points(const std::vector<BoundaryPoint>& ps) {
    std::vector<std::string> parts;
    for (const auto& p : ps) parts.push_back(p.to_string());
    return join(parts);
}

std::string rational_text(const Rational& r) {
    return r.denominator() == 1 ? std::to_string(r.numerator())
                                : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// ---------------------------------------------------------------- command plans

struct WalkPlan {
    bool log_steps = false;
};

WalkPlan walk_plan(const RunConfig& c) {
    check_keys(c.section, "walk", {"log_steps"});
    WalkPlan p;
    if (c.section.contains("log_steps")) p.log_steps = get_bool(c.section["log_steps"], "walk.log_steps");
    return p;
}

struct SatPlan {
    f2::CylinderUnion set;
    double eps;
    std::size_t radius;
};

struct DirichletPlan {
    ClosedSet set;
    std::vector<GroupElement> elements;
    bool harmonicity = false;
};

struct CesaroPlan {
    BoundaryPoint x, y;
    double eps;
    std::vector<std::size_t> n;
};

struct MeasurePlan {
    bool oracle = false;
    bool stationarity = false;
    std::optional<std::size_t> tv_depth;
    std::optional<SatPlan> sat;
    std::optional<int> finite_boundary_radius;
    std::optional<DirichletPlan> dirichlet;
    std::optional<CesaroPlan> cesaro;
};

MeasurePlan measure_plan(const RunConfig& c) {
    const json& s = c.section;
    check_keys(s, "measure", {"source", "stationarity", "sat_probe", "finite_boundary", "dirichlet", "cesaro"});
    const bool f2 = c.model == Model::free_group;
    MeasurePlan p;
    if (s.contains("source")) {
        const auto src = get_string(s["source"], "measure.source");
        if (src != "sampled" && src != "oracle") bad("measure.source", "expected \"sampled\" or \"oracle\"");
        p.oracle = src == "oracle";
    }
    if (p.oracle && (!f2 || c.mu != json("uniform")))
        bad("measure.source", "the oracle measure is the exact hitting law of the uniform F2 walk; set mu to \"uniform\" and model to F2");
    p.stationarity = f2;
    if (s.contains("stationarity")) {
        const json& st = s["stationarity"];
        if (st.is_boolean()) {
            p.stationarity = st.get<bool>();
        } else {
            check_keys(st, "measure.stationarity", {"tv_depth"});
            p.stationarity = true;
            if (st.contains("tv_depth")) p.tv_depth = get_size(st["tv_depth"], "measure.stationarity.tv_depth");
        }
        if (p.stationarity && !f2) bad("measure.stationarity", "exact pushforwards need the F2 model");
    }
    if (s.contains("sat_probe")) {
        const json& sp = s["sat_probe"];
        check_keys(sp, "measure.sat_probe", {"set", "eps", "radius"});
        if (!f2) bad("measure.sat_probe", "needs the F2 model");
        p.sat = SatPlan{f2::CylinderUnion::of(get_strings(sp.at("set"), "measure.sat_probe.set")),
                        sp.contains("eps") ? get_double(sp["eps"], "measure.sat_probe.eps") : 0.3,
                        sp.contains("radius") ? get_size(sp["radius"], "measure.sat_probe.radius") : 3};
        if (!(p.sat->eps > 0.0 && p.sat->eps < 1.0)) bad("measure.sat_probe.eps", "must lie in (0, 1)");
    }
    if (s.contains("finite_boundary")) {
        const json& fb = s["finite_boundary"];
        check_keys(fb, "measure.finite_boundary", {"R"});
        p.finite_boundary_radius = int(get_size(fb.at("R"), "measure.finite_boundary.R"));
    }
    if (s.contains("dirichlet")) {
        const json& d = s["dirichlet"];
        check_keys(d, "measure.dirichlet", {"set", "elements", "harmonicity"});
        DirichletPlan dp{set_from_json(c.model, d.at("set")), {}, false};
        for (const auto& e : d.contains("elements") ? get_strings(d["elements"], "measure.dirichlet.elements")
                                                     : std::vector<std::string>{"e"})
            dp.elements.push_back(GroupElement::parse(c.model, e));
        if (d.contains("harmonicity")) dp.harmonicity = get_bool(d["harmonicity"], "measure.dirichlet.harmonicity");
        p.dirichlet = std::move(dp);
    }
    if (s.contains("cesaro")) {
        const json& cs = s["cesaro"];
        check_keys(cs, "measure.cesaro", {"x", "y", "eps", "n"});
        p.cesaro = CesaroPlan{BoundaryPoint::parse(c.model, get_string(cs.at("x"), "measure.cesaro.x")),
                              BoundaryPoint::parse(c.model, get_string(cs.at("y"), "measure.cesaro.y")),
                              cs.contains("eps") ? get_double(cs["eps"], "measure.cesaro.eps") : 0.25,
                              cs.contains("n") ? get_sizes(cs["n"], "measure.cesaro.n")
                                               : std::vector<std::size_t>{10, 50, 200}};
        if (p.cesaro->x.same_as(p.cesaro->y)) bad("measure.cesaro", "x and y must differ");
        for (auto n : p.cesaro->n)
            if (n == 0) bad("measure.cesaro.n", "horizons must be positive");
    }
    return p;
}

struct CrossratioQuery {
    std::vector<BoundaryPoint> k, l;
};
struct RhoQuery {
    Triple x, y;
};
struct ProfileQuery {
    BoundaryPoint a, b, p;
    std::vector<std::size_t> radii;
};

struct GeometryPlan {
    std::vector<CrossratioQuery> crossratio;
    std::vector<RhoQuery> rho;
    std::optional<std::pair<std::size_t, std::size_t>> hyperbolicity;  // samples, max word length
    std::optional<std::pair<GroupElement, int>> loxodromic;
    std::optional<ProfileQuery> profile;
    bool needs_system() const { return !crossratio.empty() || !rho.empty() || hyperbolicity || loxodromic; }
};

Triple triple_of(Model m, const json& j, const std::string& where) {
    const auto t = get_strings(j, where);
    if (t.size() != 3) bad(where, "a triple needs exactly three points");
    return Triple(BoundaryPoint::parse(m, t[0]), BoundaryPoint::parse(m, t[1]), BoundaryPoint::parse(m, t[2]));
}

GeometryPlan geometry_plan(const RunConfig& c) {
    const json& s = c.section;
    check_keys(s, "geometry", {"crossratio", "rho", "hyperbolicity", "loxodromic", "point_profile"});
    GeometryPlan p;
    if (s.contains("crossratio")) {
        if (!s["crossratio"].is_array()) bad("geometry.crossratio", "expected an array of {K, L} queries");
        for (const auto& q : s["crossratio"]) {
            check_keys(q, "geometry.crossratio[]", {"K", "L"});
            p.crossratio.push_back(CrossratioQuery{points(c.model, get_strings(q.at("K"), "geometry.crossratio[].K")),
                                                   points(c.model, get_strings(q.at("L"), "geometry.crossratio[].L"))});
            if (p.crossratio.back().k.empty() || p.crossratio.back().l.empty())
                bad("geometry.crossratio[]", "K and L must be nonempty");
        }
    }
    if (s.contains("rho")) {
        if (!s["rho"].is_array()) bad("geometry.rho", "expected an array of {x, y} queries");
        for (const auto& q : s["rho"]) {
            check_keys(q, "geometry.rho[]", {"x", "y"});
            p.rho.push_back(RhoQuery{triple_of(c.model, q.at("x"), "geometry.rho[].x"),
                                     triple_of(c.model, q.at("y"), "geometry.rho[].y")});
        }
    }
    if (s.contains("hyperbolicity")) {
        const json& h = s["hyperbolicity"];
        check_keys(h, "geometry.hyperbolicity", {"samples", "max_word_length"});
        const auto samples = get_size(h.at("samples"), "geometry.hyperbolicity.samples");
        if (samples < 100) bad("geometry.hyperbolicity.samples", "must be at least 100");
        p.hyperbolicity = {samples, h.contains("max_word_length")
                                        ? get_size(h["max_word_length"], "geometry.hyperbolicity.max_word_length")
                                        : std::size_t(6)};
    }
    if (s.contains("loxodromic")) {
        const json& l = s["loxodromic"];
        check_keys(l, "geometry.loxodromic", {"element", "n_max"});
        auto g = GroupElement::parse(c.model, get_string(l.at("element"), "geometry.loxodromic.element"));
        if (g.is_identity()) bad("geometry.loxodromic.element", "the identity has no displacement profile");
        const auto n_max = l.contains("n_max") ? get_size(l["n_max"], "geometry.loxodromic.n_max") : std::size_t(8);
        if (n_max < 1) bad("geometry.loxodromic.n_max", "must be positive");
        p.loxodromic = {std::move(g), int(n_max)};
    }
    if (s.contains("point_profile")) {
        const json& q = s["point_profile"];
        check_keys(q, "geometry.point_profile", {"a", "b", "p", "radii"});
        p.profile = ProfileQuery{BoundaryPoint::parse(c.model, get_string(q.at("a"), "geometry.point_profile.a")),
                                 BoundaryPoint::parse(c.model, get_string(q.at("b"), "geometry.point_profile.b")),
                                 BoundaryPoint::parse(c.model, get_string(q.at("p"), "geometry.point_profile.p")),
                                 q.contains("radii") ? get_sizes(q["radii"], "geometry.point_profile.radii")
                                                     : std::vector<std::size_t>{1, 2, 3, 4}};
        if (!Triple::distinct(p.profile->a, p.profile->b, p.profile->p))
            bad("geometry.point_profile", "a, b and p must be distinct");
    }
    if (p.crossratio.empty() && p.rho.empty() && !p.hyperbolicity && !p.loxodromic && !p.profile)
        bad("geometry", "no queries; set at least one of crossratio, rho, hyperbolicity, loxodromic, point_profile");
    return p;
}

HittingOptions hitting_options(const RunConfig& c, int workers) {
    HittingOptions o;
    o.depth = c.depth;
    o.arc_bins = c.arc_bins;
    o.limit = c.limit;
    o.basepoint = basepoint(c);
    o.workers = workers;
    return o;
}

std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(double v) { return format_number(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

}  // namespace

// ---------------------------------------------------------------- config

json RunConfig::to_json() const {
    json j;
    j["command"] = command;
    j["model"] = model_name(model);
    j["seed"] = seed;
    j["ball_radius"] = ball_radius;
    if (!annulus.is_null()) j["annulus"] = annulus;
    j["mu"] = mu;
    j["n"] = n;
    j["trials"] = trials;
    j["bins"] = {{"depth", depth}, {"arc_bins", arc_bins}};
    j["limit"] = {{"min_depth", limit.min_depth}, {"min_arc_level", limit.min_arc_level}};
    if (basepoint) j["basepoint"] = {(*basepoint)[0], (*basepoint)[1], (*basepoint)[2]};
    if (!cache_dir.empty()) j["cache_dir"] = cache_dir;
    j[command] = section;
    return j;
}

RunConfig parse_config(const json& raw, const std::string& command, std::optional<std::uint64_t> seed_override) {
    static const std::set<std::string> commands{"walk", "measure", "geometry"};
    if (!commands.count(command)) bad("command", "unknown command '" + command + "'");
    RunConfig c;
    c.command = command;
    try {
        check_keys(raw, "config", {"command", "model", "seed", "ball_radius", "annulus", "mu", "n", "trials", "bins",
                                   "limit", "basepoint", "cache_dir", "walk", "measure", "geometry"});
        if (raw.contains("command") && get_string(raw["command"], "command") != command)
            bad("command", "config is for '" + raw["command"].get<std::string>() + "', not '" + command + "'");
        for (const auto& other : commands)
            if (other != command && raw.contains(other))
                bad(other, "this block does not apply to the " + command + " command");
        if (raw.contains("model")) {
            const auto name = get_string(raw["model"], "model");
            if (name != "F2" && name != "PSL2Z") bad("model", "expected \"F2\" or \"PSL2Z\"");
            c.model = parse_model(name);
        }
        if (seed_override) {
            c.seed = *seed_override;
        } else if (raw.contains("seed")) {
            if (!raw["seed"].is_number_unsigned()) bad("seed", "expected a nonnegative integer");
            c.seed = raw["seed"].get<std::uint64_t>();
        } else {
            bad("seed", "missing; pass --seed N or set \"seed\" in the config");
        }
        if (raw.contains("ball_radius")) c.ball_radius = get_size(raw["ball_radius"], "ball_radius");
        if (raw.contains("annulus") && !raw["annulus"].is_null()) {
            check_keys(raw["annulus"], "annulus", {"minus", "plus"});
            c.annulus = raw["annulus"];
        }
        if (raw.contains("mu")) {
            c.mu = raw["mu"];
            if (c.mu.is_string()) {
                if (c.mu != json("uniform")) bad("mu", "expected \"uniform\" or an object with a support list");
            } else {
                check_keys(c.mu, "mu", {"support", "generation_override"});
                if (!c.mu.contains("support") || !c.mu["support"].is_array()) bad("mu.support", "expected an array");
                for (const auto& a : c.mu["support"]) check_keys(a, "mu.support[]", {"element", "probability"});
            }
        }
        if (raw.contains("n")) c.n = get_size(raw["n"], "n");
        if (c.n < 50) bad("n", "walk length must be at least 50 (shorter paths never give a limit verdict)");
        if (raw.contains("trials")) c.trials = get_size(raw["trials"], "trials");
        if (c.trials < 1) bad("trials", "must be positive");
        if (raw.contains("bins")) {
            const json& b = raw["bins"];
            check_keys(b, "bins", {"depth", "arc_bins"});
            if (b.contains("depth")) c.depth = get_size(b["depth"], "bins.depth");
            if (b.contains("arc_bins")) c.arc_bins = get_size(b["arc_bins"], "bins.arc_bins");
        }
        if (c.depth < 1 || c.depth > 10) bad("bins.depth", "must lie in 1..10");
        if (c.arc_bins < 1) bad("bins.arc_bins", "must be positive");
        if (raw.contains("limit")) {
            const json& l = raw["limit"];
            check_keys(l, "limit", {"min_depth", "min_arc_level"});
            if (l.contains("min_depth")) c.limit.min_depth = get_size(l["min_depth"], "limit.min_depth");
            if (l.contains("min_arc_level")) c.limit.min_arc_level = get_size(l["min_arc_level"], "limit.min_arc_level");
        }
        if (raw.contains("basepoint")) {
            const auto t = get_strings(raw["basepoint"], "basepoint");
            if (t.size() != 3) bad("basepoint", "a triple needs exactly three points");
            c.basepoint = std::array<std::string, 3>{t[0], t[1], t[2]};
        }
        if (raw.contains("cache_dir")) c.cache_dir = get_string(raw["cache_dir"], "cache_dir");
        if (raw.contains(command)) c.section = raw[command];
        if (!c.section.is_object()) bad(command, "expected an object");

        // build everything once so bad values are caught before any computation
        step_law(c);
        generator_annulus(c);
        basepoint(c);
        if (command == "walk") walk_plan(c);
        if (command == "measure") measure_plan(c);
        if (command == "geometry") geometry_plan(c);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config) throw;
        fail(ErrorCode::config, e.what());
    } catch (const json::exception& e) {
        fail(ErrorCode::config, std::string("malformed config: ") + e.what());
    }
    return c;
}

StepDistribution step_law(const RunConfig& cfg) {
    if (cfg.mu.is_string()) return StepDistribution::uniform(cfg.model);
    std::vector<StepDistribution::Atom> atoms;
    for (const auto& a : cfg.mu.at("support"))
        atoms.push_back({GroupElement::parse(cfg.model, get_string(a.at("element"), "mu.support[].element")),
                         get_double(a.at("probability"), "mu.support[].probability")});
    return StepDistribution(std::move(atoms),
                            cfg.mu.contains("generation_override")
                                ? get_string(cfg.mu["generation_override"], "mu.generation_override")
                                : std::string());
}

Annulus generator_annulus(const RunConfig& cfg) {
    if (cfg.annulus.is_null()) return Annulus::default_for(cfg.model);
    return Annulus(set_from_json(cfg.model, cfg.annulus.at("minus")), set_from_json(cfg.model, cfg.annulus.at("plus")));
}

Triple basepoint(const RunConfig& cfg) {
    if (!cfg.basepoint) return default_basepoint(cfg.model);
    const auto& t = *cfg.basepoint;
    return Triple(BoundaryPoint::parse(cfg.model, t[0]), BoundaryPoint::parse(cfg.model, t[1]),
                  BoundaryPoint::parse(cfg.model, t[2]));
}

AnnulusSystem annulus_system(const RunConfig& cfg) {
    const auto spec = ModelSpec::defaults(cfg.model);
    if (cfg.cache_dir.empty()) return AnnulusSystem::build(spec, generator_annulus(cfg), cfg.ball_radius);
    return AnnulusSystem::cached(cfg.cache_dir, spec, generator_annulus(cfg), cfg.ball_radius);
}

// ---------------------------------------------------------------- output

std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string to_csv(const Table& t) {
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::ostringstream os;
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << field(t.header[i]);
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << field(row[i]);
        os << "\n";
    }
    return os.str();
}

void write_run(const std::filesystem::path& dir, const RunConfig& cfg, int workers, const RunOutput& out) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) fail(ErrorCode::io, "cannot write " + (dir / name).string());
    };
    json files = json::array({"config.json", "summary.json"});
    for (const auto& t : out.tables) files.push_back(t.name + ".csv");
    const json manifest{{"tool", kToolName},   {"version", kToolVersion}, {"command", cfg.command},
                        {"seed", cfg.seed},    {"workers", workers},      {"files", files},
                        {"config", cfg.to_json()}};
    write("manifest.json", manifest.dump(2) + "\n");
    write("config.json", cfg.to_json().dump(2) + "\n");
    write("summary.json", out.summary.dump(2) + "\n");
    for (const auto& t : out.tables) write(t.name + ".csv", to_csv(t));
}

// ---------------------------------------------------------------- commands

RunOutput run_walk(const RunConfig& cfg, int workers) {
    const auto plan = walk_plan(cfg);
    const auto mu = step_law(cfg);
    auto opt = hitting_options(cfg, workers);
    opt.depth = 1;  // verdicts use limit.min_depth alone
    const auto limits = sample_limits(mu, cfg.trials, cfg.n, cfg.seed, opt);

    RunOutput out;
    Table t{"limits", {"path", "conclusive", "depth", "limit", "representative"}, {}};
    std::size_t conclusive = 0;
    for (std::size_t i = 0; i < limits.size(); ++i) {
        const auto& l = limits[i];
        conclusive += l ? 1 : 0;
        t.rows.push_back({cell(i), cell(bool(l)), l ? cell(l->depth) : "", l ? l->to_string() : "",
                          l ? l->representative().to_string() : ""});
    }
    out.tables.push_back(std::move(t));
    if (plan.log_steps) {
        Table steps{"steps", {"path", "step", "increment", "product"}, {}};
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            const auto path = sample_path(mu, cfg.n, cfg.seed, i);
            for (std::size_t k = 0; k < path.increments.size(); ++k)
                steps.rows.push_back(
                    {cell(i), cell(k + 1), path.increments[k].to_string(), path.products[k + 1].to_string()});
        }
        out.tables.push_back(std::move(steps));
    }
    out.summary = {{"command", "walk"},
                   {"model", model_name(cfg.model)},
                   {"seed", cfg.seed},
                   {"trials", cfg.trials},
                   {"n", cfg.n},
                   {"conclusive", conclusive},
                   {"inconclusive", cfg.trials - conclusive},
                   {"inconclusive_fraction", double(cfg.trials - conclusive) / double(cfg.trials)}};
    return out;
}

RunOutput run_measure(const RunConfig& cfg, int workers) {
    const auto plan = measure_plan(cfg);
    const auto mu = step_law(cfg);
    const auto opt = hitting_options(cfg, workers);
    RunOutput out;
    out.summary = {{"command", "measure"}, {"model", model_name(cfg.model)}, {"seed", cfg.seed}};
    json warnings = json::array();

    const auto nu = plan.oracle ? EmpiricalMeasure::tree_harmonic(cfg.depth)
                                : estimate_hitting_measure(mu, cfg.trials, cfg.n, cfg.seed, opt);
    Table bins{"bins", {"bin", "label", "mass"}, {}};
    for (std::size_t i = 0; i < nu.bin_count(); ++i)
        bins.rows.push_back({cell(i), nu.bin_label(i), cell(nu.masses()[i])});
    out.tables.push_back(std::move(bins));
    out.summary["measure"] = {{"source", plan.oracle ? "oracle" : "sampled"},
                              {"bins", nu.bin_count()},
                              {"trials", nu.trials},
                              {"conclusive", nu.conclusive},
                              {"inconclusive", nu.inconclusive},
                              {"total", nu.total()}};

    if (plan.stationarity) {
        const auto r = check_stationarity(nu, mu, plan.tv_depth);
        out.tables.push_back(Table{"stationarity", {"tv_depth", "tv"}, {{cell(r.tv_depth), cell(r.tv)}}});
        out.summary["stationarity"] = {{"tv", r.tv}, {"tv_depth", r.tv_depth}};
    }
    if (plan.sat) {
        const auto w = sat_probe(plan.sat->set, plan.sat->eps, plan.sat->radius, nu, ModelSpec::defaults(cfg.model));
        out.tables.push_back(Table{"sat_probe",
                                   {"set", "eps", "radius", "witness", "mass"},
                                   {{plan.sat->set.to_string(), cell(plan.sat->eps), cell(plan.sat->radius),
                                     w ? w->element.to_string() : "", w ? cell(w->mass) : ""}}});
        out.summary["sat_probe"] = {{"found", bool(w)}};
        if (w) out.summary["sat_probe"].update({{"witness", w->element.to_string()}, {"mass", w->mass}});
    }
    if (plan.finite_boundary_radius) {
        const int r = *plan.finite_boundary_radius;
        const auto sys = annulus_system(cfg);
        const auto fb = estimate_finite_boundary_mass(mu, sys, basepoint(cfg), r, cfg.trials, cfg.n,
                                                      derive_seed(cfg.seed, 1), opt);
        out.tables.push_back(Table{"finite_boundary",
                                   {"R", "ball_radius", "passing", "conclusive", "inconclusive", "fraction", "saturated"},
                                   {{cell(r), cell(cfg.ball_radius), cell(fb.passing), cell(fb.conclusive),
                                     cell(fb.inconclusive), cell(fb.fraction), cell(fb.saturated)}}});
        out.summary["finite_boundary"] = {{"R", r}, {"fraction", fb.fraction}, {"saturated", fb.saturated}};
        if (fb.saturated)
            warnings.push_back("finite_boundary: R reaches the longest chain of the truncated system; every point passes");
    }
    if (plan.dirichlet) {
        const auto& d = *plan.dirichlet;
        BinFunction f = BinFunction::indicator(d.set);
        Table t{"dirichlet", {"element", "mean", "standard_error", "samples"}, {}};
        if (d.harmonicity) t.header.insert(t.header.end(), {"averaged", "joint_standard_error", "gap"});
        for (std::size_t k = 0; k < d.elements.size(); ++k) {
            const auto seed = derive_seed(cfg.seed, 2 + k);
            if (d.harmonicity) {
                const auto h = harmonicity_check(f, d.elements[k], mu, cfg.trials, cfg.n, seed, opt);
                t.rows.push_back({d.elements[k].to_string(), cell(h.at_g.mean), cell(h.at_g.standard_error),
                                  cell(h.at_g.samples), cell(h.averaged.mean), cell(h.joint_standard_error),
                                  cell(h.gap)});
            } else {
                const auto h = dirichlet_extension(f, d.elements[k], mu, cfg.trials, cfg.n, seed, opt);
                t.rows.push_back({d.elements[k].to_string(), cell(h.mean), cell(h.standard_error), cell(h.samples)});
            }
        }
        out.tables.push_back(std::move(t));
    }
    if (plan.cesaro) {
        const auto& c = *plan.cesaro;
        const auto profile = cesaro_proximality(c.x, c.y, c.eps, mu, c.n, cfg.trials, derive_seed(cfg.seed, 100), workers);
        Table t{"cesaro", {"n", "probability", "standard_error"}, {}};
        for (const auto& p : profile) t.rows.push_back({cell(p.n), cell(p.probability), cell(p.standard_error)});
        out.tables.push_back(std::move(t));
    }
    out.summary["warnings"] = warnings;
    return out;
}

RunOutput run_geometry(const RunConfig& cfg, int workers) {
    const auto plan = geometry_plan(cfg);
    RunOutput out;
    out.summary = {{"command", "geometry"},
                   {"model", model_name(cfg.model)},
                   {"seed", cfg.seed},
                   {"ball_radius", cfg.ball_radius}};
    std::optional<AnnulusSystem> sys;
    if (plan.needs_system()) {
        sys = annulus_system(cfg);
        out.summary["annuli"] = sys->size();
    }
    if (!plan.crossratio.empty()) {
        Table t{"crossratio", {"query", "K", "L", "value", "witness"}, {}};
        json values = json::array();
        for (std::size_t i = 0; i < plan.crossratio.size(); ++i) {
            const auto& q = plan.crossratio[i];
            const int v = sys->crossratio(q.k, q.l);
            std::vector<std::string> chain;
            for (std::size_t e : sys->crossratio_witness(q.k, q.l)) {
                const auto& entry = sys->entries()[e];
                chain.push_back((entry.sign > 0 ? "+" : "-") + (entry.label.empty() ? std::string("e") : entry.label));
            }
            t.rows.push_back({cell(i), join_points(q.k), join_points(q.l), cell(v), join(chain)});
            values.push_back(v);
        }
        out.tables.push_back(std::move(t));
        out.summary["crossratio"] = values;
    }
    if (!plan.rho.empty()) {
        Table t{"rho", {"query", "x", "y", "rho"}, {}};
        for (std::size_t i = 0; i < plan.rho.size(); ++i) {
            const auto& q = plan.rho[i];
            t.rows.push_back({cell(i), q.x.to_string(), q.y.to_string(), cell(rho(q.x, q.y, *sys).value)});
        }
        out.tables.push_back(std::move(t));
    }
    if (plan.hyperbolicity) {
        HyperbolicityOptions ho;
        ho.max_word_length = plan.hyperbolicity->second;
        ho.workers = workers;
        const auto h = estimate_hyperbolicity(plan.hyperbolicity->first, *sys, cfg.seed, ho);
        out.tables.push_back(Table{"hyperbolicity",
                                   {"samples", "max_word_length", "triangle_defect", "delta"},
                                   {{cell(h.samples), cell(ho.max_word_length), cell(h.triangle_defect),
                                     rational_text(h.delta)}}});
        out.summary["hyperbolicity"] = {{"triangle_defect", h.triangle_defect}, {"delta", rational_text(h.delta)}};
    }
    if (plan.loxodromic) {
        const auto& [g, n_max] = *plan.loxodromic;
        const auto prof = loxodromic_displacement(g, basepoint(cfg), n_max, *sys);
        Table t{"loxodromic", {"n", "rho"}, {}};
        for (const auto& [n, v] : prof.points) t.rows.push_back({cell(n), cell(v)});
        out.tables.push_back(std::move(t));
        const auto fit = fit_linear_lower_bound(prof);
        out.summary["loxodromic"] = {{"element", g.to_string()},
                                     {"type", element_type_name(prof.type)},
                                     {"linear_lower_bound", linear_lower_bound(prof)},
                                     {"fit_period", fit.period},
                                     {"fit_slope", fit.slope}};
    }
    if (plan.profile) {
        const auto& q = *plan.profile;
        const auto values = pair_crossratio_to_point(q.a, q.b, q.p, ModelSpec::defaults(cfg.model),
                                                     generator_annulus(cfg), q.radii);
        Table t{"point_profile", {"radius", "value"}, {}};
        for (const auto& rv : values) t.rows.push_back({cell(rv.radius), cell(rv.value)});
        out.tables.push_back(std::move(t));
    }
    return out;
}

RunOutput run_command(const RunConfig& cfg, int workers) {
    if (cfg.command == "walk") return run_walk(cfg, workers);
    if (cfg.command == "measure") return run_measure(cfg, workers);
    return run_geometry(cfg, workers);
}

// ---------------------------------------------------------------- entry point

namespace {

int report_error(ErrorCode code, const std::string& message) {
    std::cerr << json{{"error", error_code_name(code)}, {"code", int(code)}, {"message", message}}.dump() << "\n";
    return int(code);
}

json read_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::io, "cannot read config file " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::config, "config file " + path + " is not valid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random walks, hitting measures and crossratio geometry on F2 and PSL(2,Z)", kToolName};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<int> only;
    std::map<std::string, CLI::Option*> seed_opts;
    const std::map<std::string, std::string> blurbs{
        {"walk", "sample walk paths and their boundary limits"},
        {"measure", "hitting measure, stationarity, finite-boundary mass, Dirichlet and Cesaro estimates"},
        {"geometry", "crossratios, rho, hyperbolicity and displacement profiles"}};
    for (const auto& [name, blurb] : blurbs) {
        auto* sub = app.add_subcommand(name, blurb);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        seed_opts[name] = sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--workers", workers, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory (default runs/<command>-<seed>)");
    }
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    self->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    self->add_option("--out", out_dir, "write acceptance.csv here");
    self->add_option("--only", only, "criterion numbers to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << app.help() << "\n";
        return report_error(ErrorCode::config, e.what());
    }

    try {
        if (self->parsed()) {
            AcceptanceOptions opt;
            opt.workers = workers;
            opt.only = only;
            opt.on_result = [](const CriterionResult& r) {
                std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.title << ", "
                          << format_number(std::round(r.seconds * 100) / 100) << " s): " << r.detail << std::endl;
            };
            const auto results = run_acceptance(opt);
            std::size_t passed = 0;
            for (const auto& r : results) passed += r.pass ? 1 : 0;
            std::cout << passed << " of " << results.size() << " criteria passed" << std::endl;
            if (!out_dir.empty()) {
                Table t{"acceptance", {"criterion", "title", "pass", "seconds", "detail"}, {}};
                for (const auto& r : results)
                    t.rows.push_back({cell(r.id), r.title, cell(r.pass), cell(r.seconds), r.detail});
                std::filesystem::create_directories(out_dir);
                std::ofstream(std::filesystem::path(out_dir) / "acceptance.csv") << to_csv(t);
            }
            return passed == results.size() ? 0 : 1;
        }
        for (const auto& [name, opt] : seed_opts) {
            auto* sub = app.get_subcommand(name);
            if (!sub->parsed()) continue;
            const json raw = read_config(config_path);
            std::optional<std::uint64_t> seed_override;
            if (opt->count() > 0) seed_override = seed;
            RunConfig cfg;
            try {
                cfg = parse_config(raw, name, seed_override);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::config) std::cerr << sub->help() << "\n";
                throw;
            }
            const auto out = run_command(cfg, workers);
            const std::filesystem::path dir =
                out_dir.empty() ? std::filesystem::path("runs") / (name + "-" + std::to_string(cfg.seed)) : std::filesystem::path(out_dir);
            write_run(dir, cfg, workers, out);
            std::cout << out.summary.dump() << "\n" << "wrote " << dir.string() << std::endl;
            return 0;
        }
    } catch (const Error& e) {
        return report_error(e.code(), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return report_error(ErrorCode::io, e.what());
    } catch (const std::exception& e) {
        return report_error(ErrorCode::invalid_argument, e.what());
    }
    return report_error(ErrorCode::config, "no command given");
}

}  // namespace convwalk::cli
