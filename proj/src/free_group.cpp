#include "convwalk/free_group.hpp"

#include <algorithm>
#include <set>

#include "convwalk/error.hpp"

namespace convwalk::f2 {

std::string free_reduce(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        require(is_letter(c), std::string("not a free-group letter: '") + c + "'");
        if (!out.empty() && out.back() == inverse_letter(c))
            out.pop_back();
        else
            out.push_back(c);
    }
    return out;
}

bool is_reduced(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!is_letter(s[i])) return false;
        if (i > 0 && s[i - 1] == inverse_letter(s[i])) return false;
    }
    return true;
}

std::vector<std::string> children(std::string_view u) {
    std::vector<std::string> out;
    out.reserve(4);
    for (char c : kLetters) {
        if (!u.empty() && u.back() == inverse_letter(c)) continue;
        std::string w(u);
        w.push_back(c);
        out.push_back(std::move(w));
    }
    return out;
}

std::size_t sphere_size(std::size_t n) {
    if (n == 0) return 1;
    std::size_t s = 4;
    for (std::size_t i = 1; i < n; ++i) s *= 3;
    return s;
}

std::vector<std::string> sphere(std::size_t n) {
    std::vector<std::string> level{std::string()};
    for (std::size_t d = 0; d < n; ++d) {
        std::vector<std::string> next;
        next.reserve(level.size() * 3 + 1);
        for (const auto& w : level)
            for (auto& c : children(w)) next.push_back(std::move(c));
        level = std::move(next);
    }
    return level;
}

// ---------------------------------------------------------------- Word

Word Word::parse(std::string_view text) {
    if (text == "e" || text.empty()) return Word();
    return Word(free_reduce(text));
}

Word Word::from_reduced(std::string letters) {
    require(is_reduced(letters), "word is not reduced: " + letters);
    return Word(std::move(letters));
}

Word Word::inverse() const {
    std::string s(letters_.rbegin(), letters_.rend());
    for (char& c : s) c = inverse_letter(c);
    return Word(std::move(s));
}

Word Word::pow(long long n) const {
    const Word base = n < 0 ? inverse() : *this;
    Word out;
    for (long long i = 0; i < (n < 0 ? -n : n); ++i) out = out * base;
    return out;
}

Word operator*(const Word& x, const Word& y) {
    const auto& p = x.letters_;
    const auto& q = y.letters_;
    std::size_t k = 0;
    while (k < p.size() && k < q.size() && p[p.size() - 1 - k] == inverse_letter(q[k])) ++k;
    std::string s = p.substr(0, p.size() - k);
    s.append(q, k, std::string::npos);
    return Word(std::move(s));
}

// ---------------------------------------------------------------- End

namespace {

std::string primitive_root(const std::string& block) {
    const std::size_t n = block.size();
    for (std::size_t d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        bool periodic = true;
        for (std::size_t i = d; i < n && periodic; ++i) periodic = block[i] == block[i - d];
        if (periodic) return block.substr(0, d);
    }
    return block;
}

}  // namespace

End End::make(std::string_view prefix, std::string_view block_in) {
    require(!block_in.empty(), "periodic block must be nonempty");
    std::string block(block_in);
    require(is_reduced(block), "periodic block is not reduced: " + block);
    require(block.size() == 1 || block.back() != inverse_letter(block.front()),
            "periodic block is not cyclically reduced: " + block);
    block = primitive_root(block);

    // Enough copies that cancellation against the prefix cannot exhaust them.
    const std::size_t copies = prefix.size() / block.size() + 2;
    std::string s(prefix);
    for (std::size_t i = 0; i < copies; ++i) s += block;
    std::string r = free_reduce(s);

    // r ends in a suffix of block^copies, so r . block^inf is the same end.
    while (!r.empty() && r.back() == block.back()) {
        r.pop_back();
        std::rotate(block.rbegin(), block.rbegin() + 1, block.rend());
    }
    return End(std::move(r), std::move(block));
}

End End::parse(std::string_view text) {
    const auto open = text.find('(');
    require(open != std::string_view::npos && !text.empty() && text.back() == ')',
            "end must be written prefix(block): " + std::string(text));
    return make(text.substr(0, open), text.substr(open + 1, text.size() - open - 2));
}

char End::letter(std::size_t i) const {
    if (i < prefix_.size()) return prefix_[i];
    return block_[(i - prefix_.size()) % block_.size()];
}

std::string End::head(std::size_t n) const {
    std::string s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.push_back(letter(i));
    return s;
}

bool End::starts_with(std::string_view w) const {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (letter(i) != w[i]) return false;
    return true;
}

End End::act(const Word& g) const { return make(g.letters() + prefix_, block_); }

std::size_t common_prefix(const End& x, const End& y, std::size_t cap) {
    std::size_t k = 0;
    while (k < cap && x.letter(k) == y.letter(k)) ++k;
    return k;
}

// ---------------------------------------------------------------- CylinderUnion

namespace {

bool is_prefix(std::string_view p, std::string_view w) {
    return p.size() <= w.size() && w.compare(0, p.size(), p) == 0;
}

std::size_t child_count(std::string_view u) { return u.empty() ? 4 : 3; }

std::vector<std::string> canonical(std::vector<std::string> words) {
    for (const auto& w : words) require(is_reduced(w), "cylinder word is not reduced: " + w);
    std::sort(words.begin(), words.end(),
              [](const std::string& x, const std::string& y) {
                  return x.size() != y.size() ? x.size() < y.size() : x < y;
              });
    words.erase(std::unique(words.begin(), words.end()), words.end());

    bool changed = true;
    while (changed) {
        changed = false;
        // drop cylinders contained in a shorter one (sorted by length first)
        std::vector<std::string> kept;
        for (const auto& w : words) {
            bool covered = false;
            for (const auto& k : kept)
                if (is_prefix(k, w)) {
                    covered = true;
                    break;
                }
            if (!covered) kept.push_back(w);
        }
        // merge complete sibling families into their parent
        std::set<std::string> present(kept.begin(), kept.end());
        for (const auto& w : kept) {
            if (w.empty() || !present.count(w)) continue;
            const std::string parent = w.substr(0, w.size() - 1);
            const auto sibs = children(parent);
            if (sibs.size() != child_count(parent)) continue;
            if (std::all_of(sibs.begin(), sibs.end(), [&](const std::string& s) { return present.count(s) > 0; })) {
                for (const auto& s : sibs) present.erase(s);
                present.insert(parent);
                changed = true;
            }
        }
        words.assign(present.begin(), present.end());
        std::sort(words.begin(), words.end(),
                  [](const std::string& x, const std::string& y) {
                      return x.size() != y.size() ? x.size() < y.size() : x < y;
                  });
    }
    std::sort(words.begin(), words.end());
    return words;
}

void complement_rec(const std::string& u, const std::vector<std::string>& set, std::vector<std::string>& out) {
    bool extends = false;
    for (const auto& v : set) {
        if (is_prefix(v, u)) return;
        if (is_prefix(u, v)) extends = true;
    }
    if (!extends) {
        out.push_back(u);
        return;
    }
    for (const auto& c : children(u)) complement_rec(c, set, out);
}

bool contains_rec(std::string_view u, const std::vector<std::string>& set) {
    bool extends = false;
    for (const auto& v : set) {
        if (is_prefix(v, u)) return true;
        if (is_prefix(u, v)) extends = true;
    }
    if (!extends) return false;
    for (const auto& c : children(u))
        if (!contains_rec(c, set)) return false;
    return true;
}

}  // namespace

CylinderUnion CylinderUnion::of(std::vector<std::string> words) {
    CylinderUnion s;
    s.words_ = canonical(std::move(words));
    return s;
}

std::size_t CylinderUnion::max_depth() const {
    std::size_t d = 0;
    for (const auto& w : words_) d = std::max(d, w.size());
    return d;
}

bool CylinderUnion::contains(const End& p) const {
    for (const auto& w : words_)
        if (p.starts_with(w)) return true;
    return false;
}

bool CylinderUnion::contains_cylinder(std::string_view u) const { return contains_rec(u, words_); }

bool CylinderUnion::contains(const CylinderUnion& other) const {
    for (const auto& w : other.words_)
        if (!contains_cylinder(w)) return false;
    return true;
}

CylinderUnion CylinderUnion::complement() const {
    std::vector<std::string> out;
    complement_rec(std::string(), words_, out);
    return of(std::move(out));
}

CylinderUnion CylinderUnion::unite(const CylinderUnion& other) const {
    std::vector<std::string> all = words_;
    all.insert(all.end(), other.words_.begin(), other.words_.end());
    return of(std::move(all));
}

CylinderUnion CylinderUnion::intersect(const CylinderUnion& other) const {
    return complement().unite(other.complement()).complement();
}

CylinderUnion cylinder_image(const Word& g, std::string_view w) {
    const auto& p = g.letters();
    std::size_t k = 0;
    while (k < p.size() && k < w.size() && p[p.size() - 1 - k] == inverse_letter(w[k])) ++k;
    if (k < w.size()) {
        std::string u = p.substr(0, p.size() - k);
        u.append(w.substr(k));
        return CylinderUnion::cylinder(u);
    }
    if (w.empty()) return CylinderUnion::whole();
    // g = g' w^-1 reduced: g C(w) = g' (M \ C(c)) with c = w_last^-1, and
    // g' c is reduced because g' does not end in w_last.
    std::string u = p.substr(0, p.size() - w.size());
    u.push_back(inverse_letter(w.back()));
    return CylinderUnion::cylinder(u).complement();
}

CylinderUnion CylinderUnion::image(const Word& g) const {
    std::vector<std::string> all;
    for (const auto& w : words_) {
        const auto part = cylinder_image(g, w);
        all.insert(all.end(), part.words().begin(), part.words().end());
    }
    return of(std::move(all));
}

std::string CylinderUnion::to_string() const {
    if (words_.empty()) return "{}";
    std::string s = "{";
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (i) s += ",";
        s += "C(" + (words_[i].empty() ? std::string("e") : words_[i]) + ")";
    }
    return s + "}";
}

}  // namespace convwalk::f2
