#pragma once

// Annuli (A-, A+), the order relation between annuli and boundary sets, and
// the crossratio (K|L): the length of the longest chain K < A1 < ... < An < L
// inside a symmetric annulus system.
//
// The system generated by one annulus is infinite; AnnulusSystem keeps the
// translates g(+-A) for g in a word-metric ball, so every crossratio computed
// here is a lower bound for the untruncated one and is nondecreasing in the
// ball radius.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "convwalk/group_models.hpp"

namespace convwalk {

class Annulus {
public:
    /// Requires minus and plus disjoint with a nonempty complement.
    Annulus(ClosedSet minus, ClosedSet plus);

    const ClosedSet& minus() const noexcept { return minus_; }
    const ClosedSet& plus() const noexcept { return plus_; }
    Model model() const noexcept { return minus_.model(); }

    Annulus negate() const { return Annulus(plus_, minus_, Unchecked{}); }
    Annulus translate(const GroupElement& g) const { return Annulus(act_set(g, minus_), act_set(g, plus_), Unchecked{}); }

    bool same_as(const Annulus& other) const { return minus_.same_as(other.minus_) && plus_.same_as(other.plus_); }
    std::string to_string() const { return "(" + minus_.to_string() + " | " + plus_.to_string() + ")"; }

    /// The model's default generator annulus: (C(a^-1), C(a)) for F2; closed
    /// arcs around the repelling/attracting fixed points of H = [2,1,1,1]
    /// of radius one third of their distance for PSL2Z.
    static Annulus default_for(Model m);

private:
    struct Unchecked {};
    Annulus(ClosedSet minus, ClosedSet plus, Unchecked) : minus_(std::move(minus)), plus_(std::move(plus)) {}
    ClosedSet minus_, plus_;
};

using PointSet = std::vector<BoundaryPoint>;

/// A < B iff int A+ and int B- cover the boundary.
bool annulus_less(const Annulus& a, const Annulus& b);
/// K < A iff K lies in int A-.
bool set_less(const PointSet& k, const Annulus& a);
bool set_less(const ClosedSet& k, const Annulus& a);
/// A < L iff L lies in int A+.
bool annulus_less_set(const Annulus& a, const PointSet& l);
bool annulus_less_set(const Annulus& a, const ClosedSet& l);

class AnnulusSystem {
public:
    struct Entry {
        Annulus annulus;
        std::string label;  ///< translating word
        int sign = 1;       ///< +1 for g(A), -1 for g(-A)
    };

    static AnnulusSystem build(const ModelSpec& spec, const Annulus& generator, std::size_t ball_radius);

    Model model() const noexcept { return generator_.model(); }
    const Annulus& generator() const noexcept { return generator_; }
    std::size_t ball_radius() const noexcept { return radius_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool less(std::size_t i, std::size_t j) const { return less_[i][j] != 0; }

    /// Longest chain length K < A1 < ... < An < L (0 if none).
    int crossratio(const PointSet& k, const PointSet& l) const;
    /// A longest chain, as entry indices; ties go to the earliest entries.
    std::vector<std::size_t> crossratio_witness(const PointSet& k, const PointSet& l) const;

    /// Number of annuli in a longest chain of the system.
    int longest_chain() const;

    /// The image system {g A' : A' in this system}.
    AnnulusSystem translated(const GroupElement& g) const;

    /// Cache key: model, generator, generators and radius.
    std::string cache_key() const;
    nlohmann::json to_json() const;
    static AnnulusSystem from_json(const nlohmann::json& j);

    /// Loads a persisted system for (spec, generator, radius) from `dir` if
    /// present and matching; otherwise builds it and stores it there.
    static AnnulusSystem cached(const std::filesystem::path& dir, const ModelSpec& spec, const Annulus& generator,
                                std::size_t ball_radius);

private:
    AnnulusSystem(Annulus generator, std::size_t radius, std::string key)
        : generator_(std::move(generator)), radius_(radius), key_(std::move(key)) {}
    void finish();
    std::vector<int> chain_lengths(const PointSet& k, const PointSet& l, std::vector<std::size_t>* pred) const;

    Annulus generator_;
    std::size_t radius_ = 0;
    std::string key_;
    std::vector<Entry> entries_;
    std::vector<std::vector<char>> less_;
    std::vector<std::vector<std::size_t>> preds_;
    std::vector<std::size_t> topo_;
};

std::string cache_key(const ModelSpec& spec, const Annulus& generator, std::size_t ball_radius);

/// F2 sets as word lists, circle sets as [start, length] arc pairs.
nlohmann::json set_to_json(const ClosedSet& s);
ClosedSet set_from_json(Model m, const nlohmann::json& j);

}  // namespace convwalk
