#pragma once

// Borel subsets of the naturals used as summation domains. Five closed
// variants: finite set, initial range 0..N, all of N, the positive
// naturals, and complements of finite sets.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtmf {

class IndexSetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndexSet {
public:
    enum class Tag { Finite, Range, All, Positive, Cofinite };

    static IndexSet finite(std::vector<std::uint64_t> members) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        IndexSet s;
        s.tag_ = Tag::Finite;
        s.elems_ = std::move(members);
        return s;
    }

    static IndexSet range(std::uint64_t upper) {  // {0, 1, ..., upper}
        IndexSet s;
        s.tag_ = Tag::Range;
        s.bound_ = upper;
        return s;
    }

    static IndexSet all() {
        IndexSet s;
        s.tag_ = Tag::All;
        return s;
    }

    static IndexSet positive() {
        IndexSet s;
        s.tag_ = Tag::Positive;
        return s;
    }

    static IndexSet cofinite(std::vector<std::uint64_t> excluded) {
        std::sort(excluded.begin(), excluded.end());
        excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());
        if (excluded.empty()) return all();
        IndexSet s;
        s.tag_ = Tag::Cofinite;
        s.elems_ = std::move(excluded);
        return s;
    }

    Tag tag() const { return tag_; }
    const std::vector<std::uint64_t>& elements() const { return elems_; }
    std::uint64_t range_bound() const { return bound_; }

    bool contains(std::uint64_t n) const {
        switch (tag_) {
        case Tag::Finite:
            return std::binary_search(elems_.begin(), elems_.end(), n);
        case Tag::Range: return n <= bound_;
        case Tag::All: return true;
        case Tag::Positive: return n >= 1;
        case Tag::Cofinite:
            return !std::binary_search(elems_.begin(), elems_.end(), n);
        }
        return false;
    }

    bool is_finite() const { return tag_ == Tag::Finite || tag_ == Tag::Range; }

    bool empty() const { return tag_ == Tag::Finite && elems_.empty(); }

    std::vector<std::uint64_t> enumerate_up_to(std::uint64_t limit) const {
        std::vector<std::uint64_t> out;
        switch (tag_) {
        case Tag::Finite:
            for (auto n : elems_)
                if (n <= limit) out.push_back(n);
            break;
        case Tag::Range:
            for (std::uint64_t n = 0; n <= std::min(limit, bound_); ++n) out.push_back(n);
            break;
        case Tag::All:
            for (std::uint64_t n = 0; n <= limit; ++n) out.push_back(n);
            break;
        case Tag::Positive:
            for (std::uint64_t n = 1; n <= limit; ++n) out.push_back(n);
            break;
        case Tag::Cofinite:
            for (std::uint64_t n = 0; n <= limit; ++n)
                if (contains(n)) out.push_back(n);
            break;
        }
        return out;
    }

    // First `count` members in ascending order (may be fewer if the set is
    // smaller).
    std::vector<std::uint64_t> first_members(std::size_t count) const {
        if (is_finite()) {
            auto v = enumerate_up_to(tag_ == Tag::Range
                                         ? bound_
                                         : (elems_.empty() ? 0 : elems_.back()));
            if (v.size() > count) v.resize(count);
            return v;
        }
        std::vector<std::uint64_t> out;
        for (std::uint64_t n = 0; out.size() < count; ++n)
            if (contains(n)) out.push_back(n);
        return out;
    }

    friend IndexSet intersect(const IndexSet& a, const IndexSet& b) {
        if (a.tag_ == Tag::All) return b;
        if (b.tag_ == Tag::All) return a;
        // A bounded operand lets us filter directly.
        if (a.is_finite() || b.is_finite()) {
            const IndexSet& bounded = a.is_finite() ? a : b;
            const IndexSet& other = a.is_finite() ? b : a;
            std::uint64_t lim = bounded.tag_ == Tag::Range
                                    ? bounded.bound_
                                    : (bounded.elems_.empty() ? 0 : bounded.elems_.back());
            std::vector<std::uint64_t> out;
            for (auto n : bounded.enumerate_up_to(lim))
                if (other.contains(n)) out.push_back(n);
            return finite(std::move(out));
        }
        // Remaining combinations of Positive / Cofinite stay cofinite.
        std::vector<std::uint64_t> excluded;
        if (a.tag_ == Tag::Cofinite) excluded.insert(excluded.end(), a.elems_.begin(), a.elems_.end());
        if (b.tag_ == Tag::Cofinite) excluded.insert(excluded.end(), b.elems_.begin(), b.elems_.end());
        if (a.tag_ == Tag::Positive || b.tag_ == Tag::Positive) excluded.push_back(0);
        return cofinite(std::move(excluded));
    }

    friend IndexSet set_union(const IndexSet& a, const IndexSet& b) {
        if (a.tag_ == Tag::All || b.tag_ == Tag::All) return all();
        if (a.is_finite() && b.is_finite()) {
            std::vector<std::uint64_t> out;
            std::uint64_t la = a.tag_ == Tag::Range ? a.bound_ : (a.elems_.empty() ? 0 : a.elems_.back());
            std::uint64_t lb = b.tag_ == Tag::Range ? b.bound_ : (b.elems_.empty() ? 0 : b.elems_.back());
            for (auto n : a.enumerate_up_to(la)) out.push_back(n);
            for (auto n : b.enumerate_up_to(lb)) out.push_back(n);
            return finite(std::move(out));
        }
        // One operand is Positive or Cofinite: the union misses only the
        // finitely many naturals missed by that operand and not covered by
        // the other.
        const IndexSet& wide = !a.is_finite() ? a : b;
        const IndexSet& other = !a.is_finite() ? b : a;
        std::vector<std::uint64_t> missing;
        if (wide.tag_ == Tag::Positive) {
            if (!other.contains(0)) missing.push_back(0);
        } else {
            for (auto n : wide.elems_)
                if (!other.contains(n)) missing.push_back(n);
        }
        if (!other.is_finite() && other.tag_ != wide.tag_) {
            // Positive ∪ Cofinite: recompute from the cofinite side too.
            const IndexSet& co = wide.tag_ == Tag::Cofinite ? wide : other;
            const IndexSet& pos = wide.tag_ == Tag::Cofinite ? other : wide;
            missing.clear();
            for (auto n : co.elems_)
                if (!pos.contains(n)) missing.push_back(n);
        }
        return cofinite(std::move(missing));
    }

    bool operator==(const IndexSet& o) const {
        return tag_ == o.tag_ && bound_ == o.bound_ && elems_ == o.elems_;
    }

    std::string to_text() const {
        switch (tag_) {
        case Tag::Finite: {
            std::string s = "{";
            bool first = true;
            for (auto n : elems_) {
                if (!first) s += ",";
                s += std::to_string(n);
                first = false;
            }
            return s + "}";
        }
        case Tag::Range: return "0.." + std::to_string(bound_);
        case Tag::All: return "N";
        case Tag::Positive: return "N+";
        case Tag::Cofinite: {
            std::string s = "N\\{";
            bool first = true;
            for (auto n : elems_) {
                if (!first) s += ",";
                s += std::to_string(n);
                first = false;
            }
            return s + "}";
        }
        }
        return "?";
    }

    // Textual forms: "{1,4}", "0..N", "N", "N+", "N\{...}".
    static IndexSet parse(std::string_view text) {
        std::string s;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) s += c;
        if (s.empty()) throw IndexSetError("empty index-set text");
        auto parse_list = [](std::string_view body) {
            std::vector<std::uint64_t> out;
            std::size_t i = 0;
            while (i < body.size()) {
                std::size_t j = i;
                while (j < body.size() && body[j] != ',') ++j;
                std::string tok(body.substr(i, j - i));
                if (tok.empty()) throw IndexSetError("empty element in index-set list");
                for (char c : tok)
                    if (!std::isdigit(static_cast<unsigned char>(c)))
                        throw IndexSetError("non-numeric index-set element: " + tok);
                out.push_back(std::stoull(tok));
                i = j + 1;
            }
            return out;
        };
        if (s == "N") return all();
        if (s == "N+") return positive();
        if (s.front() == '{' && s.back() == '}')
            return finite(parse_list(std::string_view(s).substr(1, s.size() - 2)));
        if (s.rfind("N\\{", 0) == 0 && s.back() == '}')
            return cofinite(parse_list(std::string_view(s).substr(3, s.size() - 4)));
        auto dots = s.find("..");
        if (dots != std::string::npos) {
            std::string lo = s.substr(0, dots), hi = s.substr(dots + 2);
            if (lo != "0") throw IndexSetError("ranges must start at 0: " + s);
            for (char c : hi)
                if (!std::isdigit(static_cast<unsigned char>(c)))
                    throw IndexSetError("malformed range bound: " + s);
            if (hi.empty()) throw IndexSetError("malformed range: " + s);
            return range(std::stoull(hi));
        }
        throw IndexSetError("unrecognized index-set text: " + s);
    }

private:
    Tag tag_ = Tag::Finite;
    std::uint64_t bound_ = 0;
    std::vector<std::uint64_t> elems_;
};

}  // namespace mtmf
