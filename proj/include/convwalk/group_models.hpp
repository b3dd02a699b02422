#pragma once

// The two convergence-group actions everything else runs on:
//   F2     acting on the ends of its Cayley tree (a Cantor set), and
//   PSL2Z  acting by Moebius maps on the boundary circle.
// Values of the three types below carry their model; mixing models throws
// ErrorCode::model_mismatch.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "convwalk/free_group.hpp"
#include "convwalk/modular.hpp"
#include "convwalk/rng.hpp"

namespace convwalk {

enum class Model { free_group, modular };

std::string model_name(Model m);
Model parse_model(std::string_view name);

class GroupElement {
public:
    explicit GroupElement(f2::Word w) : v_(std::move(w)) {}
    explicit GroupElement(psl2::Matrix m) : v_(std::move(m)) {}

    static GroupElement identity(Model m);
    static GroupElement parse(Model m, std::string_view text);

    Model model() const noexcept { return v_.index() == 0 ? Model::free_group : Model::modular; }
    const f2::Word& word() const;
    const psl2::Matrix& matrix() const;

    bool is_identity() const;
    GroupElement inverse() const;
    GroupElement pow(long long n) const;
    friend GroupElement operator*(const GroupElement& x, const GroupElement& y);

    /// Word length for F2; 0 for matrices (no canonical length).
    std::size_t word_length() const;

    std::string to_string() const;

    friend bool operator==(const GroupElement& x, const GroupElement& y) { return x.v_ == y.v_; }
    friend bool operator<(const GroupElement& x, const GroupElement& y);

private:
    std::variant<f2::Word, psl2::Matrix> v_;
};

class BoundaryPoint {
public:
    explicit BoundaryPoint(f2::End e) : v_(std::move(e)) {}
    explicit BoundaryPoint(psl2::Point p) : v_(p) {}

    /// F2: "prefix(block)". PSL2Z: "inf", "p/q", a decimal real, or "angle:θ".
    static BoundaryPoint parse(Model m, std::string_view text);

    Model model() const noexcept { return v_.index() == 0 ? Model::free_group : Model::modular; }
    const f2::End& end() const;
    const psl2::Point& point() const;

    /// Exact for F2, within psl2::kAngleTol for the circle.
    bool same_as(const BoundaryPoint& other) const;

    std::string to_string() const;

private:
    std::variant<f2::End, psl2::Point> v_;
};

/// A proper nonempty closed subset of the boundary.
class ClosedSet {
public:
    explicit ClosedSet(f2::CylinderUnion s);
    explicit ClosedSet(psl2::ArcUnion s);

    static ClosedSet cylinder(std::string_view w) { return ClosedSet(f2::CylinderUnion::cylinder(w)); }
    static ClosedSet arc(double centre, double radius) { return ClosedSet(psl2::ArcUnion::ball(centre, radius)); }

    Model model() const noexcept { return v_.index() == 0 ? Model::free_group : Model::modular; }
    const f2::CylinderUnion& cylinders() const;
    const psl2::ArcUnion& arcs() const;

    bool contains(const BoundaryPoint& p) const;
    bool contains_interior(const BoundaryPoint& p) const;

    bool same_as(const ClosedSet& other) const;
    std::string to_string() const;

private:
    std::variant<f2::CylinderUnion, psl2::ArcUnion> v_;
};

/// True iff int(x) and int(y) together cover the boundary.
bool interiors_cover(const ClosedSet& x, const ClosedSet& y);
bool disjoint(const ClosedSet& x, const ClosedSet& y);

BoundaryPoint act(const GroupElement& g, const BoundaryPoint& p);
ClosedSet act_set(const GroupElement& g, const ClosedSet& s);

void check_same_model(Model x, Model y, const char* what);

// ---------------------------------------------------------------- generators and balls

/// A model together with the symmetric generating set that defines its word
/// metric (ball enumeration) and the default generator annulus.
struct ModelSpec {
    Model model = Model::free_group;
    std::vector<std::pair<std::string, GroupElement>> generators;

    static ModelSpec defaults(Model m);
};

struct BallEntry {
    GroupElement element;
    std::string label;  ///< shortest generator word, first in BFS order
    std::size_t length = 0;
};

/// Word-metric ball of the given radius, in BFS order; within each sphere
/// elements are ordered by their label.
std::vector<BallEntry> word_ball(const ModelSpec& spec, std::size_t radius);

// ---------------------------------------------------------------- estimates

/// A nested neighborhood target: a cylinder C(word) for F2, or a closed arc
/// of half-width `half_width` around `centre` for the circle.
struct BoundaryEstimate {
    Model model = Model::free_group;
    std::string word;
    double centre = 0.0;
    double half_width = 0.0;
    std::size_t depth = 0;

    /// A boundary point inside the target: word . (last letter)^inf, or the
    /// centre of the arc.
    BoundaryPoint representative() const;
    bool contains(const BoundaryPoint& p) const;
    std::string to_string() const;
};

struct ConvergenceReport {
    bool conclusive = false;
    std::optional<BoundaryEstimate> attracting;
    std::optional<BoundaryEstimate> repelling;
    /// F2: common cylinder depth; circle: worst angular spread (radians).
    double attracting_tightness = 0.0;
    double repelling_tightness = 0.0;
};

struct ConvergenceOptions {
    std::size_t min_depth = 3;  ///< F2 cylinder depth needed for a verdict
    double max_spread = 1e-3;   ///< circle: allowed cluster spread
};

/// Empirical attracting/repelling pair of a sequence of distinct elements,
/// read off from the last 20% of the sequence applied to the probe set.
ConvergenceReport convergence_subsequence(const std::vector<GroupElement>& seq, const std::vector<BoundaryPoint>& probe,
                                          const ConvergenceOptions& opt = {});

// ---------------------------------------------------------------- sampling helpers

/// A random reduced word of the given length.
std::string random_reduced_word(RandomStream& rng, std::size_t length);
/// Random boundary point: F2 picks a random reduced prefix of length
/// < max_prefix and a random periodic tail; the circle a uniform angle.
BoundaryPoint random_boundary_point(Model m, RandomStream& rng, std::size_t max_prefix = 6);
/// Random element of word length exactly `length` (F2) or a random product of
/// `length` generators (PSL2Z).
GroupElement random_element(const ModelSpec& spec, RandomStream& rng, std::size_t length);

}  // namespace convwalk
