#pragma once

// Normal-form word arithmetic in free products of finite cyclic groups,
// plus coset canonicalization for <r^n> quotients.

#include <cstdint>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace percloc {

// One cyclic factor Z_order. Its Cayley graph with all non-identity
// generators is the complete graph on `order` vertices.
struct FactorSpec {
    uint16_t order;
};

struct Letter {
    uint16_t factor;
    uint16_t elt;  // in 1..order-1, never 0

    friend bool operator==(const Letter&, const Letter&) = default;
    friend auto operator<=>(const Letter&, const Letter&) = default;
};

// Normal-form element of a free product: alternating letters, no identity
// letters. The empty word is the group identity.
struct Word {
    std::vector<Letter> letters;

    bool empty() const { return letters.empty(); }
    size_t length() const { return letters.size(); }

    friend bool operator==(const Word&, const Word&) = default;

    // (length, then lexicographic by (factor, elt)) order; used for
    // canonical coset representatives.
    friend bool operator<(const Word& a, const Word& b) {
        if (a.letters.size() != b.letters.size())
            return a.letters.size() < b.letters.size();
        return a.letters < b.letters;
    }
};

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct WordHash {
    size_t operator()(const Word& w) const {
        uint64_t h = 0x243f6a8885a308d3ULL;
        for (const Letter& l : w.letters)
            h = mix64(h ^ (uint64_t(l.factor) << 16 | l.elt));
        return size_t(h);
    }
};

// Vertex-key serialization: uint32 LE letter count, then per letter
// uint16 LE factor and uint16 LE element. Injective over normal forms.
inline std::string serialize(const Word& w) {
    std::string out;
    out.reserve(4 + 4 * w.letters.size());
    uint32_t n = uint32_t(w.letters.size());
    for (int i = 0; i < 4; ++i) out.push_back(char((n >> (8 * i)) & 0xff));
    for (const Letter& l : w.letters) {
        out.push_back(char(l.factor & 0xff));
        out.push_back(char(l.factor >> 8));
        out.push_back(char(l.elt & 0xff));
        out.push_back(char(l.elt >> 8));
    }
    return out;
}

inline std::string hex_key(const Word& w) {
    static const char* digits = "0123456789abcdef";
    std::string bytes = serialize(w);
    std::string out;
    out.reserve(2 * bytes.size());
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

// Free product of finite cyclic factors; owns the factor orders needed to
// reduce products to normal form.
class FreeProductGroup {
public:
    explicit FreeProductGroup(std::vector<FactorSpec> factors)
        : factors_(std::move(factors)) {
        if (factors_.empty()) throw std::invalid_argument("no factors");
        for (const FactorSpec& f : factors_)
            if (f.order < 2) throw std::invalid_argument("factor order must be >= 2");
    }

    const std::vector<FactorSpec>& factors() const { return factors_; }
    size_t num_factors() const { return factors_.size(); }
    uint16_t order(size_t i) const { return factors_[i].order; }

    // Sum of (order_i - 1): the degree of the Cayley graph over all
    // non-identity generators.
    int generator_count() const {
        int d = 0;
        for (const FactorSpec& f : factors_) d += f.order - 1;
        return d;
    }

    bool is_normal_form(const Word& w) const {
        for (size_t i = 0; i < w.letters.size(); ++i) {
            const Letter& l = w.letters[i];
            if (l.factor >= factors_.size()) return false;
            if (l.elt == 0 || l.elt >= order(l.factor)) return false;
            if (i > 0 && w.letters[i - 1].factor == l.factor) return false;
        }
        return true;
    }

    // Append one letter to a normal form, merging/cancelling at the end.
    void push_letter(Word& w, Letter l) const {
        if (!w.letters.empty() && w.letters.back().factor == l.factor) {
            uint16_t s = uint16_t((w.letters.back().elt + l.elt) % order(l.factor));
            if (s == 0)
                w.letters.pop_back();
            else
                w.letters.back().elt = s;
        } else {
            w.letters.push_back(l);
        }
    }

    Word multiply(const Word& a, const Word& b) const {
        Word out = a;
        out.letters.reserve(a.letters.size() + b.letters.size());
        for (const Letter& l : b.letters) push_letter(out, l);
        return out;
    }

    Word inverse(const Word& w) const {
        Word out;
        out.letters.reserve(w.letters.size());
        for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
            out.letters.push_back({it->factor, uint16_t(order(it->factor) - it->elt)});
        return out;
    }

    Word power(const Word& r, long long k) const {
        Word base = k < 0 ? inverse(r) : r;
        unsigned long long m = k < 0 ? (unsigned long long)(-k) : (unsigned long long)k;
        Word out;
        for (unsigned long long i = 0; i < m; ++i) out = multiply(out, base);
        return out;
    }

    Word letter_word(uint16_t factor, uint16_t elt) const {
        return Word{{Letter{factor, elt}}};
    }

private:
    std::vector<FactorSpec> factors_;
};

// r must be cyclically reduced (first and last letters in different
// factors) and of infinite order, so |r^k| = |k|*|r| exactly.
class CosetContext {
public:
    CosetContext(const FreeProductGroup& group, Word r, int n)
        : group_(&group), r_(std::move(r)), n_(n) {
        if (n_ < 1) throw std::invalid_argument("quotient index must be >= 1");
        if (r_.empty()) throw std::invalid_argument("relator must be nonempty");
        if (!group.is_normal_form(r_))
            throw std::invalid_argument("relator not in normal form");
        if (r_.length() > 1 &&
            r_.letters.front().factor == r_.letters.back().factor)
            throw std::invalid_argument("relator must be cyclically reduced");
        rn_ = group.power(r_, n_);
        if (rn_.empty()) throw std::invalid_argument("r^n reduces to identity");
        // infinite-order check: |r^k| strictly increasing for k = 1..10
        size_t prev = 0;
        for (int k = 1; k <= 10; ++k) {
            size_t len = group.power(r_, k).length();
            if (len <= prev)
                throw std::invalid_argument("relator appears to have finite order");
            prev = len;
        }
    }

    const FreeProductGroup& group() const { return *group_; }
    const Word& relator() const { return r_; }
    int index() const { return n_; }
    const Word& rn() const { return rn_; }

    // Unique minimal representative of the right coset {r^(n k) * w : k in
    // Z}. (Right cosets make v -> v*g well-defined on cosets, so quotient
    // edges come from right multiplication and right translations are the
    // automorphisms.) Since r is cyclically reduced, |r^(nk)| = |nk||r|, and
    // any candidate longer than 2|w| + |r^n| cannot beat one already seen.
    Word canonical(const Word& w) const {
        Word best = w;
        const long long lim =
            (long long)(2 * w.length() + rn_.length()) / (long long)rn_.length() + 1;
        Word pos = w, neg = w;
        Word rn_inv = group_->inverse(rn_);
        for (long long k = 1; k <= lim; ++k) {
            pos = group_->multiply(rn_, pos);
            neg = group_->multiply(rn_inv, neg);
            if (pos < best) best = pos;
            if (neg < best) best = neg;
        }
        return best;
    }

private:
    const FreeProductGroup* group_;
    Word r_;
    int n_;
    Word rn_;
};

}  // namespace percloc
