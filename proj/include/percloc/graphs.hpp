#pragma once

// Implicit (neighbor-oracle) transitive graphs: free-product Cayley graphs,
// their <r^n>-coset quotients, and the modified grandparent construction.

#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <string>
#include <vector>

#include "words.hpp"

namespace percloc {

enum class GraphFamily {
    free_product_cayley,  // includes T_d when all factors are Z_2
    coset_quotient,
    modified_grandparent,
};

// Canonical unordered pair of vertex keys plus a slot index resolving
// parallel edges. Stable under endpoint swap.
struct EdgeKey {
    Word a, b;      // a <= b in (length, lex) order
    uint32_t slot;  // 0-based among parallel edges between a and b

    friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

using VertexSet = std::unordered_set<Word, WordHash>;

inline EdgeKey make_edge_key(const Word& u, const Word& v, uint32_t slot = 0) {
    if (v < u) return EdgeKey{v, u, slot};
    return EdgeKey{u, v, slot};
}

struct EdgeKeyHash {
    size_t operator()(const EdgeKey& e) const {
        WordHash wh;
        return size_t(mix64(wh(e.a) ^ mix64(wh(e.b) ^ e.slot)));
    }
};

inline uint64_t edge_key_hash64(const EdgeKey& e) {
    WordHash wh;
    return mix64(uint64_t(wh(e.a)) ^ mix64(uint64_t(wh(e.b)) ^ (uint64_t(e.slot) << 32)));
}

class GraphImpl {
public:
    virtual ~GraphImpl() = default;
    virtual GraphFamily family() const = 0;
    virtual int degree() const = 0;
    virtual const FreeProductGroup& group() const = 0;
    // Ordered multiset of exactly degree() neighbor entries.
    virtual std::vector<Word> neighbors(const Word& v) const = 0;
    // Graph distance from the identity root.
    virtual int dist_to_root(const Word& v) const = 0;
    // Root-fixing-symmetry class of a vertex; -1 when no classifier exists.
    virtual int sphere_class(const Word& v) const { return -1; }
    // Image of v under the left-translation automorphism taking the root
    // to g.
    virtual Word translate(const Word& g, const Word& v) const = 0;
    virtual std::string describe() const = 0;
};

// Value handle; immutable and freely shareable.
class ImplicitGraph {
public:
    explicit ImplicitGraph(std::shared_ptr<const GraphImpl> impl)
        : impl_(std::move(impl)) {}

    GraphFamily family() const { return impl_->family(); }
    int degree() const { return impl_->degree(); }
    Word root() const { return Word{}; }
    const FreeProductGroup& group() const { return impl_->group(); }
    std::vector<Word> neighbors(const Word& v) const { return impl_->neighbors(v); }
    int dist_to_root(const Word& v) const { return impl_->dist_to_root(v); }
    int sphere_class(const Word& v) const { return impl_->sphere_class(v); }
    Word translate(const Word& g, const Word& v) const { return impl_->translate(g, v); }
    std::string describe() const { return impl_->describe(); }
    const GraphImpl& impl() const { return *impl_; }

private:
    std::shared_ptr<const GraphImpl> impl_;
};

namespace detail {

inline std::vector<Letter> generator_list(const FreeProductGroup& g) {
    std::vector<Letter> gens;
    for (uint16_t f = 0; f < g.num_factors(); ++f)
        for (uint16_t e = 1; e < g.order(f); ++e)
            gens.push_back(Letter{f, e});
    return gens;
}

class FreeProductCayley final : public GraphImpl {
public:
    explicit FreeProductCayley(FreeProductGroup g)
        : group_(std::move(g)), gens_(generator_list(group_)) {}

    GraphFamily family() const override { return GraphFamily::free_product_cayley; }
    int degree() const override { return int(gens_.size()); }
    const FreeProductGroup& group() const override { return group_; }

    std::vector<Word> neighbors(const Word& v) const override {
        std::vector<Word> out;
        out.reserve(gens_.size());
        for (const Letter& g : gens_) {
            Word w = v;
            group_.push_letter(w, g);
            out.push_back(std::move(w));
        }
        return out;
    }

    // Each generator step changes the normal-form length by at most one.
    int dist_to_root(const Word& v) const override { return int(v.length()); }

    // Last-letter factor index; spheres of a free-product Cayley graph
    // split into one class per terminal factor. When all factors have the
    // same order the graph is spherically symmetric and spheres are a
    // single class.
    int sphere_class(const Word& v) const override {
        bool uniform = true;
        for (const FactorSpec& f : group_.factors())
            if (f.order != group_.order(0)) uniform = false;
        if (uniform || v.empty()) return 0;
        return int(v.letters.back().factor);
    }

    Word translate(const Word& g, const Word& v) const override {
        return group_.multiply(g, v);
    }

    std::string describe() const override {
        std::string s = "free_product(";
        for (size_t i = 0; i < group_.num_factors(); ++i) {
            if (i) s += "*";
            s += "Z" + std::to_string(group_.order(i));
        }
        return s + ")";
    }

    bool is_tree() const {
        for (const FactorSpec& f : group_.factors())
            if (f.order != 2) return false;
        return true;
    }

private:
    FreeProductGroup group_;
    std::vector<Letter> gens_;
};

class CosetQuotient final : public GraphImpl {
public:
    CosetQuotient(std::shared_ptr<const FreeProductCayley> base, CosetContext ctx)
        : base_(std::move(base)), ctx_(std::move(ctx)) {}

    GraphFamily family() const override { return GraphFamily::coset_quotient; }
    int degree() const override { return base_->degree(); }
    const FreeProductGroup& group() const override { return base_->group(); }
    const CosetContext& ctx() const { return ctx_; }
    const FreeProductCayley& base() const { return *base_; }

    std::vector<Word> neighbors(const Word& v) const override {
        std::vector<Word> out = base_->neighbors(v);
        for (Word& w : out) w = ctx_.canonical(w);
        return out;
    }

    // The canonical representative is length-minimal in its coset, and
    // quotient distance is the minimum over lifts.
    int dist_to_root(const Word& v) const override { return int(v.length()); }

    int sphere_class(const Word& v) const override { return base_->sphere_class(v); }

    // Left multiplication by the canonical representative of g.  On the
    // quotient this is not a global automorphism, but it is an isomorphism
    // between balls of radius up to the injectivity radius (half the length
    // of r^n), which covers every radius at which the quotient still agrees
    // with its base graph; that is the only regime in which callers
    // transport balls or exit measures.
    Word translate(const Word& g, const Word& v) const override {
        return ctx_.canonical(group().multiply(ctx_.canonical(g), v));
    }

    std::string describe() const override {
        return base_->describe() + "/<r^" + std::to_string(ctx_.index()) + ">";
    }

private:
    std::shared_ptr<const FreeProductCayley> base_;
    CosetContext ctx_;
};

// T_d (or a T_d quotient) with extra edges between all tree-distance-2
// pairs; degree d + d(d-1) = d^2.
class ModifiedGrandparent final : public GraphImpl {
public:
    explicit ModifiedGrandparent(std::shared_ptr<const GraphImpl> base, int tree_degree)
        : base_(std::move(base)), d_(tree_degree) {}

    GraphFamily family() const override { return GraphFamily::modified_grandparent; }
    int degree() const override { return d_ * d_; }
    const FreeProductGroup& group() const override { return base_->group(); }
    const GraphImpl& base() const { return *base_; }

    std::vector<Word> neighbors(const Word& v) const override {
        std::vector<Word> tree_nbrs = base_->neighbors(v);
        std::vector<Word> out;
        out.reserve(size_t(d_) * d_);
        for (const Word& u : tree_nbrs) out.push_back(u);
        // distance-2 vertices: step again, skipping the edge back to v
        for (const Word& u : tree_nbrs) {
            std::vector<Word> second = base_->neighbors(u);
            // Generators are involutions, so exactly one entry of second is
            // the step back to v; the other d-1 are the distance-2 vertices
            // through u (possibly coinciding with other entries in a
            // quotient, which keeps the multiset convention).
            bool skipped = false;
            for (const Word& w : second) {
                if (!skipped && w == v) {
                    skipped = true;
                    continue;
                }
                out.push_back(w);
            }
            if (!skipped)
                throw std::logic_error("tree step did not return to origin");
        }
        return out;
    }

    int dist_to_root(const Word& v) const override {
        return (base_->dist_to_root(v) + 1) / 2;
    }

    // S_1^n = odd tree distance, S_2^n = even tree distance.
    int sphere_class(const Word& v) const override {
        if (v.empty()) return 1;
        return base_->dist_to_root(v) % 2 == 1 ? 0 : 1;
    }

    Word translate(const Word& g, const Word& v) const override {
        return base_->translate(g, v);
    }

    std::string describe() const override {
        return "modified_grandparent(" + base_->describe() + ")";
    }

private:
    std::shared_ptr<const GraphImpl> base_;
    int d_;
};

}  // namespace detail

inline ImplicitGraph make_free_product(std::vector<FactorSpec> factors) {
    if (factors.size() < 2)
        throw std::invalid_argument("a single finite factor gives a finite graph");
    FreeProductGroup g(std::move(factors));
    return ImplicitGraph(std::make_shared<detail::FreeProductCayley>(std::move(g)));
}

// d-regular tree as the Cayley graph of d involutions.
inline ImplicitGraph make_tree(int d) {
    if (d < 2) throw std::invalid_argument("tree degree must be >= 2");
    std::vector<FactorSpec> f(size_t(d), FactorSpec{2});
    return make_free_product(std::move(f));
}

inline bool is_tree_graph(const ImplicitGraph& g) {
    auto* fp = dynamic_cast<const detail::FreeProductCayley*>(&g.impl());
    return fp != nullptr && fp->is_tree();
}

inline ImplicitGraph make_quotient(const ImplicitGraph& base, Word r, int n) {
    auto* raw = dynamic_cast<const detail::FreeProductCayley*>(&base.impl());
    if (!raw) throw std::invalid_argument("quotient base must be a free-product Cayley graph");
    auto owned = std::make_shared<detail::FreeProductCayley>(*raw);
    CosetContext ctx(owned->group(), std::move(r), n);
    return ImplicitGraph(std::make_shared<detail::CosetQuotient>(owned, std::move(ctx)));
}

// Coset context of a quotient graph (throws for other families).
inline const CosetContext& quotient_context(const ImplicitGraph& g) {
    auto* q = dynamic_cast<const detail::CosetQuotient*>(&g.impl());
    if (!q) throw std::invalid_argument("graph is not a coset quotient");
    return q->ctx();
}

inline ImplicitGraph make_modified_grandparent(const ImplicitGraph& base) {
    const GraphImpl& impl = base.impl();
    int d = 0;
    if (auto* fp = dynamic_cast<const detail::FreeProductCayley*>(&impl)) {
        if (!fp->is_tree() || fp->degree() < 3)
            throw std::invalid_argument("base must be T_d with d >= 3");
        d = fp->degree();
        auto owned = std::make_shared<detail::FreeProductCayley>(*fp);
        return ImplicitGraph(std::make_shared<detail::ModifiedGrandparent>(owned, d));
    }
    if (auto* q = dynamic_cast<const detail::CosetQuotient*>(&impl)) {
        if (!q->base().is_tree() || q->degree() < 3)
            throw std::invalid_argument("base must be a T_d quotient with d >= 3");
        d = q->degree();
        auto owned = std::make_shared<detail::CosetQuotient>(*q);
        return ImplicitGraph(std::make_shared<detail::ModifiedGrandparent>(owned, d));
    }
    throw std::invalid_argument("modified grandparent needs T_d or a T_d quotient");
}

}  // namespace percloc
