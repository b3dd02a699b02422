#pragma once

// Free group F2 = <a, b>: reduced words, eventually periodic ends, and
// clopen subsets of the end space written as finite unions of cylinders.
//
// Letters are the characters 'a', 'b' and their inverses 'A', 'B'.

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace convwalk::f2 {

inline constexpr std::array<char, 4> kLetters = {'a', 'A', 'b', 'B'};

constexpr bool is_letter(char c) { return c == 'a' || c == 'A' || c == 'b' || c == 'B'; }

constexpr char inverse_letter(char c) {
    switch (c) {
    case 'a': return 'A';
    case 'A': return 'a';
    case 'b': return 'B';
    case 'B': return 'b';
    }
    return c;
}

/// Free reduction of an arbitrary string over the four letters.
std::string free_reduce(std::string_view s);

bool is_reduced(std::string_view s);

/// Reduced one-letter extensions of `u`, in kLetters order.
std::vector<std::string> children(std::string_view u);

/// Number of reduced words of length exactly n.
std::size_t sphere_size(std::size_t n);

/// All reduced words of length exactly n, in lexicographic kLetters order.
std::vector<std::string> sphere(std::size_t n);

/// An element of F2 stored as its reduced word.
class Word {
public:
    Word() = default;

    /// Accepts "e" or "" for the identity; anything else is freely reduced.
    static Word parse(std::string_view text);
    static Word from_reduced(std::string letters);

    const std::string& letters() const noexcept { return letters_; }
    std::size_t length() const noexcept { return letters_.size(); }
    bool is_identity() const noexcept { return letters_.empty(); }

    Word inverse() const;
    Word pow(long long n) const;
    friend Word operator*(const Word& x, const Word& y);

    std::string to_string() const { return letters_.empty() ? std::string("e") : letters_; }

    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word&, const Word&) = default;

private:
    explicit Word(std::string letters) : letters_(std::move(letters)) {}
    std::string letters_;
};

/// An eventually periodic reduced infinite word prefix . block^inf.
///
/// Canonical form: block is primitive and cyclically reduced, the prefix is
/// reduced, the junction does not cancel, and the prefix is as short as
/// possible (its last letter differs from the block's last letter).
class End {
public:
    /// Builds the end represented by prefix . block^inf after free reduction.
    static End make(std::string_view prefix, std::string_view block);
    /// Parses "prefix(block)", e.g. "ab(a)" for a b a a a ...
    static End parse(std::string_view text);

    const std::string& prefix() const noexcept { return prefix_; }
    const std::string& block() const noexcept { return block_; }

    char letter(std::size_t i) const;
    std::string head(std::size_t n) const;
    bool starts_with(std::string_view w) const;

    End act(const Word& g) const;

    std::string to_string() const { return prefix_ + "(" + block_ + ")"; }

    friend bool operator==(const End&, const End&) = default;
    friend auto operator<=>(const End&, const End&) = default;

private:
    End(std::string prefix, std::string block) : prefix_(std::move(prefix)), block_(std::move(block)) {}
    std::string prefix_;
    std::string block_;
};

/// Length of the longest common prefix of two ends.
std::size_t common_prefix(const End& x, const End& y, std::size_t cap);

/// A clopen subset of the end space, as an irredundant union of cylinders
/// C(w). The empty word denotes the whole space; an empty list the empty set.
/// Stored in canonical form, so equality of sets is equality of lists.
class CylinderUnion {
public:
    CylinderUnion() = default;
    static CylinderUnion of(std::vector<std::string> words);
    static CylinderUnion cylinder(std::string_view w) { return of({std::string(w)}); }
    static CylinderUnion whole() { return of({std::string()}); }

    const std::vector<std::string>& words() const noexcept { return words_; }
    bool empty() const noexcept { return words_.empty(); }
    bool is_whole() const noexcept { return words_.size() == 1 && words_[0].empty(); }
    std::size_t max_depth() const;

    bool contains(const End& p) const;
    /// True iff C(u) is contained in this set.
    bool contains_cylinder(std::string_view u) const;
    bool contains(const CylinderUnion& other) const;

    CylinderUnion complement() const;
    CylinderUnion unite(const CylinderUnion& other) const;
    CylinderUnion intersect(const CylinderUnion& other) const;

    /// Exact image under left multiplication by g.
    CylinderUnion image(const Word& g) const;

    std::string to_string() const;

    friend bool operator==(const CylinderUnion&, const CylinderUnion&) = default;
    friend auto operator<=>(const CylinderUnion&, const CylinderUnion&) = default;

private:
    std::vector<std::string> words_;
};

/// Image of a single cylinder C(w) under g.
CylinderUnion cylinder_image(const Word& g, std::string_view w);

}  // namespace convwalk::f2
