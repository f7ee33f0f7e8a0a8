#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace homcount {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// A circuit variable. HostEdge x[u,v] with u<v; ColoredEdge x[(i,u),(j,v)]
// with colors i<j; Aux w[i,j] is the per-pattern-edge helper variable used by
// the hom-to-coliso transformation.
struct VariableId {
    enum class Kind : std::uint8_t { host_edge, colored_edge, aux };
    Kind kind = Kind::host_edge;
    std::int16_t a = 0, b = 0, c = 0, d = 0;

    static VariableId host_edge(int u, int v) {
        if (u == v) throw std::invalid_argument("host edge variable needs u != v");
        if (u > v) std::swap(u, v);
        return {Kind::host_edge, static_cast<std::int16_t>(u), static_cast<std::int16_t>(v), 0, 0};
    }
    static VariableId colored_edge(int i, int u, int j, int v) {
        if (i == j) throw std::invalid_argument("colored edge variable needs distinct colors");
        if (i > j) {
            std::swap(i, j);
            std::swap(u, v);
        }
        return {Kind::colored_edge, static_cast<std::int16_t>(i), static_cast<std::int16_t>(u),
                static_cast<std::int16_t>(j), static_cast<std::int16_t>(v)};
    }
    static VariableId aux(int i, int j) {
        if (i == j) throw std::invalid_argument("aux variable needs i != j");
        if (i > j) std::swap(i, j);
        return {Kind::aux, static_cast<std::int16_t>(i), static_cast<std::int16_t>(j), 0, 0};
    }

    auto operator<=>(const VariableId&) const = default;
};

inline std::string to_string(const VariableId& v) {
    std::ostringstream o;
    switch (v.kind) {
    case VariableId::Kind::host_edge:
        o << "x[" << v.a << "," << v.b << "]";
        break;
    case VariableId::Kind::colored_edge:
        o << "x[(" << v.a << "," << v.b << "),(" << v.c << "," << v.d << ")]";
        break;
    case VariableId::Kind::aux:
        o << "w[" << v.a << "," << v.b << "]";
        break;
    }
    return o.str();
}

enum class GateOp : std::uint8_t { input, constant, add, mul };

struct Gate {
    GateOp op = GateOp::constant;
    std::int32_t lhs = -1, rhs = -1;
    VariableId var{};
    Rational value;
};

// DAG of fan-in-2 gates; children always precede parents; a single output.
class Circuit {
public:
    std::int32_t add_input(const VariableId& v) {
        Gate g;
        g.op = GateOp::input;
        g.var = v;
        return push(std::move(g));
    }
    std::int32_t add_const(Rational c) {
        Gate g;
        g.op = GateOp::constant;
        g.value = std::move(c);
        return push(std::move(g));
    }
    std::int32_t add_add(std::int32_t l, std::int32_t r) { return binary(GateOp::add, l, r); }
    std::int32_t add_mul(std::int32_t l, std::int32_t r) { return binary(GateOp::mul, l, r); }

    void set_output(std::int32_t g) {
        check_ref(g);
        output_ = g;
    }
    std::int32_t output() const { return output_; }
    std::int32_t gate_count() const { return static_cast<std::int32_t>(gates_.size()); }
    const Gate& gate(std::int32_t i) const { return gates_[static_cast<std::size_t>(i)]; }
    const std::vector<Gate>& gates() const { return gates_; }

    // Distinct variables occurring on input gates, ascending.
    std::vector<VariableId> variables() const {
        std::set<VariableId> s;
        for (const auto& g : gates_)
            if (g.op == GateOp::input) s.insert(g.var);
        return {s.begin(), s.end()};
    }

private:
    std::int32_t push(Gate g) {
        gates_.push_back(std::move(g));
        return static_cast<std::int32_t>(gates_.size()) - 1;
    }
    std::int32_t binary(GateOp op, std::int32_t l, std::int32_t r) {
        check_ref(l);
        check_ref(r);
        Gate g;
        g.op = op;
        g.lhs = l;
        g.rhs = r;
        return push(std::move(g));
    }
    void check_ref(std::int32_t g) const {
        if (g < 0 || g >= gate_count()) throw std::invalid_argument("gate reference out of range");
    }
    std::vector<Gate> gates_;
    std::int32_t output_ = -1;
};

// Size is the number of edges; inputs and constants contribute none.
inline int size(const Circuit& c) {
    int s = 0;
    for (const auto& g : c.gates())
        if (g.op == GateOp::add || g.op == GateOp::mul) s += 2;
    return s;
}

// Edges on the longest output-to-input path.
inline int depth(const Circuit& c) {
    if (c.output() < 0) return 0;
    std::vector<int> d(static_cast<std::size_t>(c.gate_count()), 0);
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        const Gate& g = c.gate(i);
        if (g.op == GateOp::add || g.op == GateOp::mul)
            d[static_cast<std::size_t>(i)] =
                1 + std::max(d[static_cast<std::size_t>(g.lhs)], d[static_cast<std::size_t>(g.rhs)]);
    }
    return d[static_cast<std::size_t>(c.output())];
}

enum class Flavor { monotone, skew, formula };

struct FlavorReport {
    bool ok = true;
    std::int32_t violating_gate = -1;
    std::string message;
    explicit operator bool() const { return ok; }
};

inline FlavorReport validate(const Circuit& c, Flavor flavor) {
    switch (flavor) {
    case Flavor::monotone:
        for (std::int32_t i = 0; i < c.gate_count(); ++i)
            if (c.gate(i).op == GateOp::constant && c.gate(i).value < 0)
                return {false, i, "negative constant"};
        return {};
    case Flavor::skew:
        for (std::int32_t i = 0; i < c.gate_count(); ++i) {
            const Gate& g = c.gate(i);
            if (g.op != GateOp::mul) continue;
            auto leafish = [&](std::int32_t x) {
                GateOp op = c.gate(x).op;
                return op == GateOp::input || op == GateOp::constant;
            };
            if (!leafish(g.lhs) && !leafish(g.rhs)) return {false, i, "multiplication of two non-input gates"};
        }
        return {};
    case Flavor::formula: {
        std::vector<int> outdeg(static_cast<std::size_t>(c.gate_count()), 0);
        for (std::int32_t i = 0; i < c.gate_count(); ++i) {
            const Gate& g = c.gate(i);
            if (g.op == GateOp::add || g.op == GateOp::mul) {
                if (++outdeg[static_cast<std::size_t>(g.lhs)] > 1) return {false, g.lhs, "gate feeds two parents"};
                if (++outdeg[static_cast<std::size_t>(g.rhs)] > 1) return {false, g.rhs, "gate feeds two parents"};
            }
        }
        return {};
    }
    }
    return {};
}

namespace detail {
inline std::vector<char> reachable_from_output(const Circuit& c) {
    std::vector<char> r(static_cast<std::size_t>(c.gate_count()), 0);
    if (c.output() < 0) return r;
    std::vector<std::int32_t> stack{c.output()};
    r[static_cast<std::size_t>(c.output())] = 1;
    while (!stack.empty()) {
        const Gate& g = c.gate(stack.back());
        stack.pop_back();
        if (g.op == GateOp::add || g.op == GateOp::mul) {
            for (std::int32_t ch : {g.lhs, g.rhs})
                if (!r[static_cast<std::size_t>(ch)]) {
                    r[static_cast<std::size_t>(ch)] = 1;
                    stack.push_back(ch);
                }
        }
    }
    return r;
}
} // namespace detail

// --- evaluation -------------------------------------------------------------

inline Rational evaluate(const Circuit& c, const std::map<VariableId, Rational>& assignment) {
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    auto reach = detail::reachable_from_output(c);
    std::vector<Rational> val(static_cast<std::size_t>(c.gate_count()));
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        if (!reach[static_cast<std::size_t>(i)]) continue;
        const Gate& g = c.gate(i);
        switch (g.op) {
        case GateOp::input: {
            auto it = assignment.find(g.var);
            if (it == assignment.end())
                throw std::invalid_argument("assignment missing variable " + to_string(g.var));
            val[static_cast<std::size_t>(i)] = it->second;
            break;
        }
        case GateOp::constant:
            val[static_cast<std::size_t>(i)] = g.value;
            break;
        case GateOp::add:
            val[static_cast<std::size_t>(i)] =
                val[static_cast<std::size_t>(g.lhs)] + val[static_cast<std::size_t>(g.rhs)];
            break;
        case GateOp::mul:
            val[static_cast<std::size_t>(i)] =
                val[static_cast<std::size_t>(g.lhs)] * val[static_cast<std::size_t>(g.rhs)];
            break;
        }
    }
    return val[static_cast<std::size_t>(c.output())];
}

namespace detail {

constexpr std::uint64_t default_prime = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}
inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    std::uint64_t s = a + b;
    if (s >= p || s < a) s -= p; // p < 2^63 in practice, no real wrap
    return s % p;
}
inline std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1 % p;
    while (e) {
        if (e & 1) r = mul_mod(r, a, p);
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    return r;
}
inline std::uint64_t integer_mod(const Integer& x, std::uint64_t p) {
    Integer m = x % Integer(p);
    if (m < 0) m += Integer(p);
    return m.convert_to<std::uint64_t>();
}
// num/den mod a prime p (den must be invertible).
inline std::uint64_t rational_mod(const Rational& q, std::uint64_t p) {
    std::uint64_t num = integer_mod(numerator(q), p);
    std::uint64_t den = integer_mod(denominator(q), p);
    if (den == 0) throw std::invalid_argument("constant denominator divisible by modulus");
    return mul_mod(num, pow_mod(den, p - 2, p), p);
}

} // namespace detail

inline std::uint64_t evaluate_mod(const Circuit& c, const std::map<VariableId, std::uint64_t>& assignment,
                                  std::uint64_t p) {
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    if (p < 2) throw std::invalid_argument("modulus must be a prime >= 2");
    auto reach = detail::reachable_from_output(c);
    std::vector<std::uint64_t> val(static_cast<std::size_t>(c.gate_count()), 0);
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        if (!reach[static_cast<std::size_t>(i)]) continue;
        const Gate& g = c.gate(i);
        switch (g.op) {
        case GateOp::input: {
            auto it = assignment.find(g.var);
            if (it == assignment.end())
                throw std::invalid_argument("assignment missing variable " + to_string(g.var));
            val[static_cast<std::size_t>(i)] = it->second % p;
            break;
        }
        case GateOp::constant:
            val[static_cast<std::size_t>(i)] = detail::rational_mod(g.value, p);
            break;
        case GateOp::add:
            val[static_cast<std::size_t>(i)] =
                detail::add_mod(val[static_cast<std::size_t>(g.lhs)], val[static_cast<std::size_t>(g.rhs)], p);
            break;
        case GateOp::mul:
            val[static_cast<std::size_t>(i)] =
                detail::mul_mod(val[static_cast<std::size_t>(g.lhs)], val[static_cast<std::size_t>(g.rhs)], p);
            break;
        }
    }
    return val[static_cast<std::size_t>(c.output())];
}

// Streaming evaluation of a formula: a depth-first walk holding one partial
// value per open binary gate, never a per-gate table. Returns the value and
// the measured peak number of simultaneously live accumulators
// (<= depth + 1 by construction).
struct StreamingResult {
    std::uint64_t value = 0;
    int peak_accumulators = 0;
};

inline StreamingResult evaluate_formula_streaming(const Circuit& c,
                                                  const std::map<VariableId, std::uint64_t>& assignment,
                                                  std::uint64_t p) {
    if (auto rep = validate(c, Flavor::formula); !rep)
        throw std::invalid_argument("streaming evaluation requires a formula (" + rep.message + ")");
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    int held = 0, peak = 0;
    auto eval = [&](auto&& self, std::int32_t gi) -> std::uint64_t {
        const Gate& g = c.gate(gi);
        switch (g.op) {
        case GateOp::input: {
            auto it = assignment.find(g.var);
            if (it == assignment.end())
                throw std::invalid_argument("assignment missing variable " + to_string(g.var));
            peak = std::max(peak, held + 1);
            return it->second % p;
        }
        case GateOp::constant:
            peak = std::max(peak, held + 1);
            return detail::rational_mod(g.value, p);
        case GateOp::add:
        case GateOp::mul: {
            std::uint64_t l = self(self, g.lhs);
            ++held;
            std::uint64_t r = self(self, g.rhs);
            --held;
            return g.op == GateOp::add ? detail::add_mod(l, r, p) : detail::mul_mod(l, r, p);
        }
        }
        return 0;
    };
    StreamingResult res;
    res.value = eval(eval, c.output());
    res.peak_accumulators = peak;
    return res;
}

// --- monomials and expansion -------------------------------------------------

// Finitely supported exponent table; the empty table is the constant monomial.
class Monomial {
public:
    Monomial() = default;
    static Monomial one() { return {}; }
    static Monomial variable(const VariableId& v) {
        Monomial m;
        m.exp_[v] = 1;
        return m;
    }

    const std::map<VariableId, int>& exponents() const { return exp_; }
    bool is_one() const { return exp_.empty(); }
    int degree() const {
        int d = 0;
        for (auto& [v, e] : exp_) d += e;
        return d;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r = *this;
        for (auto& [v, e] : o.exp_) r.exp_[v] += e;
        return r;
    }

    bool divides(const Monomial& o) const {
        for (auto& [v, e] : exp_) {
            auto it = o.exp_.find(v);
            if (it == o.exp_.end() || it->second < e) return false;
        }
        return true;
    }

    // this / d, when d divides this.
    std::optional<Monomial> divided_by(const Monomial& d) const {
        if (!d.divides(*this)) return std::nullopt;
        Monomial r = *this;
        for (auto& [v, e] : d.exp_) {
            auto it = r.exp_.find(v);
            it->second -= e;
            if (it->second == 0) r.exp_.erase(it);
        }
        return r;
    }

    bool operator==(const Monomial& o) const { return exp_ == o.exp_; }
    bool operator<(const Monomial& o) const { return exp_ < o.exp_; }

private:
    std::map<VariableId, int> exp_;
};

inline std::string to_string(const Monomial& m) {
    if (m.is_one()) return "1";
    std::ostringstream o;
    bool first = true;
    for (auto& [v, e] : m.exponents()) {
        if (!first) o << "*";
        first = false;
        o << to_string(v);
        if (e > 1) o << "^" << e;
    }
    return o.str();
}

// Coefficient table; zero coefficients are never stored.
using PolynomialTable = std::map<Monomial, Rational>;

inline Rational evaluate_table(const PolynomialTable& t, const std::map<VariableId, Rational>& assignment) {
    Rational sum = 0;
    for (auto& [m, coef] : t) {
        Rational term = coef;
        for (auto& [v, e] : m.exponents()) {
            auto it = assignment.find(v);
            if (it == assignment.end()) throw std::invalid_argument("assignment missing variable " + to_string(v));
            for (int i = 0; i < e; ++i) term *= it->second;
        }
        sum += term;
    }
    return sum;
}

// Exact coefficient table of the computed polynomial. Throws ResourceError
// (no partial result) when any intermediate table exceeds `guard` monomials.
inline PolynomialTable expand(const Circuit& c, std::size_t guard = guard_limit()) {
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    auto reach = detail::reachable_from_output(c);
    std::vector<PolynomialTable> tab(static_cast<std::size_t>(c.gate_count()));
    auto checked = [&](PolynomialTable t) {
        for (auto it = t.begin(); it != t.end();) {
            if (it->second == 0)
                it = t.erase(it);
            else
                ++it;
        }
        if (t.size() > guard) throw ResourceError("expansion exceeds guard of " + std::to_string(guard) + " monomials");
        return t;
    };
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        if (!reach[static_cast<std::size_t>(i)]) continue;
        const Gate& g = c.gate(i);
        switch (g.op) {
        case GateOp::input: {
            PolynomialTable t;
            t[Monomial::variable(g.var)] = 1;
            tab[static_cast<std::size_t>(i)] = std::move(t);
            break;
        }
        case GateOp::constant: {
            PolynomialTable t;
            if (g.value != 0) t[Monomial::one()] = g.value;
            tab[static_cast<std::size_t>(i)] = std::move(t);
            break;
        }
        case GateOp::add: {
            PolynomialTable t = tab[static_cast<std::size_t>(g.lhs)];
            for (auto& [m, coef] : tab[static_cast<std::size_t>(g.rhs)]) t[m] += coef;
            tab[static_cast<std::size_t>(i)] = checked(std::move(t));
            break;
        }
        case GateOp::mul: {
            PolynomialTable t;
            for (auto& [m1, c1] : tab[static_cast<std::size_t>(g.lhs)])
                for (auto& [m2, c2] : tab[static_cast<std::size_t>(g.rhs)]) {
                    if (t.size() > guard)
                        throw ResourceError("expansion exceeds guard of " + std::to_string(guard) + " monomials");
                    t[m1 * m2] += c1 * c2;
                }
            tab[static_cast<std::size_t>(i)] = checked(std::move(t));
            break;
        }
        }
    }
    return tab[static_cast<std::size_t>(c.output())];
}

// --- parse trees --------------------------------------------------------------

// Unrolled witness of one term: multiplication occurrences keep both circuit
// children, additions pick one, leaves are input/constant gates.
struct ParseTree {
    struct Node {
        std::int32_t gate = -1;
        std::vector<int> children; // indices into nodes
    };
    std::vector<Node> nodes;
    int root = -1;

    Monomial leaf_monomial(const Circuit& c) const {
        Monomial m;
        for (const auto& n : nodes)
            if (c.gate(n.gate).op == GateOp::input) m = m * Monomial::variable(c.gate(n.gate).var);
        return m;
    }
};

namespace detail {
// Per-gate sets of producible submonomials dividing `target` (monotone
// circuits: producible iff coefficient reachable, no cancellation).
inline std::vector<std::set<Monomial>> producible_divisors(const Circuit& c, const Monomial& target,
                                                           const std::vector<char>& reach, std::size_t guard) {
    std::vector<std::set<Monomial>> prod(static_cast<std::size_t>(c.gate_count()));
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        if (!reach[static_cast<std::size_t>(i)]) continue;
        const Gate& g = c.gate(i);
        auto& out = prod[static_cast<std::size_t>(i)];
        switch (g.op) {
        case GateOp::input: {
            Monomial m = Monomial::variable(g.var);
            if (m.divides(target)) out.insert(std::move(m));
            break;
        }
        case GateOp::constant:
            if (g.value != 0) out.insert(Monomial::one());
            break;
        case GateOp::add:
            out = prod[static_cast<std::size_t>(g.lhs)];
            for (const auto& m : prod[static_cast<std::size_t>(g.rhs)]) out.insert(m);
            break;
        case GateOp::mul:
            for (const auto& m1 : prod[static_cast<std::size_t>(g.lhs)])
                for (const auto& m2 : prod[static_cast<std::size_t>(g.rhs)]) {
                    Monomial m = m1 * m2;
                    if (m.divides(target)) out.insert(std::move(m));
                }
            break;
        }
        if (out.size() > guard) throw ResourceError("parse tree search exceeds monomial guard");
    }
    return prod;
}
} // namespace detail

// A parse tree whose leaf product equals m (up to constants), or nullopt when
// m is not a monomial of the (monotone) circuit.
inline std::optional<ParseTree> find_parse_tree(const Circuit& c, const Monomial& m,
                                                std::size_t guard = guard_limit()) {
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    auto reach = detail::reachable_from_output(c);
    auto prod = detail::producible_divisors(c, m, reach, guard);
    if (!prod[static_cast<std::size_t>(c.output())].count(m)) return std::nullopt;
    ParseTree t;
    auto build = [&](auto&& self, std::int32_t gi, const Monomial& want) -> int {
        const Gate& g = c.gate(gi);
        int idx = static_cast<int>(t.nodes.size());
        t.nodes.push_back({gi, {}});
        switch (g.op) {
        case GateOp::input:
        case GateOp::constant:
            return idx;
        case GateOp::add: {
            std::int32_t child =
                prod[static_cast<std::size_t>(g.lhs)].count(want) ? g.lhs : g.rhs;
            int ci = self(self, child, want);
            t.nodes[static_cast<std::size_t>(idx)].children.push_back(ci);
            return idx;
        }
        case GateOp::mul: {
            for (const auto& m1 : prod[static_cast<std::size_t>(g.lhs)]) {
                auto rest = want.divided_by(m1);
                if (!rest) continue;
                if (!prod[static_cast<std::size_t>(g.rhs)].count(*rest)) continue;
                int li = self(self, g.lhs, m1);
                int ri = self(self, g.rhs, *rest);
                t.nodes[static_cast<std::size_t>(idx)].children.push_back(li);
                t.nodes[static_cast<std::size_t>(idx)].children.push_back(ri);
                return idx;
            }
            throw InternalError("parse tree reconstruction lost a split");
        }
        }
        return idx;
    };
    t.root = build(build, c.output(), m);
    return t;
}

// --- normalization ------------------------------------------------------------

// Full constant folding: gates computing constants become constants, zero
// subtrees vanish, multiplications by one collapse. Keeps only gates
// reachable from the output; preserves monotone/skew/formula flavors.
inline Circuit normalize(const Circuit& c) {
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    auto reach = detail::reachable_from_output(c);
    Circuit out;
    struct R {
        bool is_const = false;
        Rational value;
        std::int32_t gate = -1;
    };
    std::vector<R> rw(static_cast<std::size_t>(c.gate_count()));
    auto materialize = [&](const R& r) -> std::int32_t {
        if (!r.is_const) return r.gate;
        return out.add_const(r.value);
    };
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        if (!reach[static_cast<std::size_t>(i)]) continue;
        const Gate& g = c.gate(i);
        R r;
        switch (g.op) {
        case GateOp::input:
            r.gate = out.add_input(g.var);
            break;
        case GateOp::constant:
            r.is_const = true;
            r.value = g.value;
            break;
        case GateOp::add: {
            const R& l = rw[static_cast<std::size_t>(g.lhs)];
            const R& rr = rw[static_cast<std::size_t>(g.rhs)];
            if (l.is_const && rr.is_const) {
                r.is_const = true;
                r.value = l.value + rr.value;
            } else if (l.is_const && l.value == 0) {
                r = rr;
            } else if (rr.is_const && rr.value == 0) {
                r = l;
            } else {
                r.gate = out.add_add(materialize(l), materialize(rr));
            }
            break;
        }
        case GateOp::mul: {
            const R& l = rw[static_cast<std::size_t>(g.lhs)];
            const R& rr = rw[static_cast<std::size_t>(g.rhs)];
            if (l.is_const && rr.is_const) {
                r.is_const = true;
                r.value = l.value * rr.value;
            } else if ((l.is_const && l.value == 0) || (rr.is_const && rr.value == 0)) {
                r.is_const = true;
                r.value = 0;
            } else if (l.is_const && l.value == 1) {
                r = rr;
            } else if (rr.is_const && rr.value == 1) {
                r = l;
            } else {
                r.gate = out.add_mul(materialize(l), materialize(rr));
            }
            break;
        }
        }
        rw[static_cast<std::size_t>(i)] = std::move(r);
    }
    const R& root = rw[static_cast<std::size_t>(c.output())];
    out.set_output(materialize(root));
    return out;
}

// --- substitution ---------------------------------------------------------------

// Per-variable rewrite target: another variable, a constant, or a product
// with an auxiliary variable (x -> x' * w).
struct SubstTarget {
    enum class Kind { variable, constant, product } kind = Kind::variable;
    VariableId var{};
    VariableId partner{};
    Rational value;

    static SubstTarget to_variable(const VariableId& v) { return {Kind::variable, v, {}, 0}; }
    static SubstTarget to_constant(Rational c) { return {Kind::constant, {}, {}, std::move(c)}; }
    static SubstTarget to_product(const VariableId& v, const VariableId& w) { return {Kind::product, v, w, 0}; }
};

using SubstitutionRule = std::map<VariableId, SubstTarget>;

// Gate-local rewrite of input gates; at most one extra multiplication per
// rewritten input. Unlisted variables are untouched.
inline Circuit substitute(const Circuit& c, const SubstitutionRule& rule) {
    Circuit out;
    std::vector<std::int32_t> map(static_cast<std::size_t>(c.gate_count()), -1);
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        const Gate& g = c.gate(i);
        std::int32_t ni = -1;
        switch (g.op) {
        case GateOp::input: {
            auto it = rule.find(g.var);
            if (it == rule.end()) {
                ni = out.add_input(g.var);
            } else {
                switch (it->second.kind) {
                case SubstTarget::Kind::variable:
                    ni = out.add_input(it->second.var);
                    break;
                case SubstTarget::Kind::constant:
                    ni = out.add_const(it->second.value);
                    break;
                case SubstTarget::Kind::product: {
                    std::int32_t a = out.add_input(it->second.var);
                    std::int32_t b = out.add_input(it->second.partner);
                    ni = out.add_mul(a, b);
                    break;
                }
                }
            }
            break;
        }
        case GateOp::constant:
            ni = out.add_const(g.value);
            break;
        case GateOp::add:
            ni = out.add_add(map[static_cast<std::size_t>(g.lhs)], map[static_cast<std::size_t>(g.rhs)]);
            break;
        case GateOp::mul:
            ni = out.add_mul(map[static_cast<std::size_t>(g.lhs)], map[static_cast<std::size_t>(g.rhs)]);
            break;
        }
        map[static_cast<std::size_t>(i)] = ni;
    }
    if (c.output() >= 0) out.set_output(map[static_cast<std::size_t>(c.output())]);
    return out;
}

// --- derivatives ------------------------------------------------------------------

// d(poly)/dv by the sum and product rules, then normalized. Preserves
// monotonicity.
inline Circuit partial_derivative(const Circuit& c, const VariableId& v) {
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    Circuit out;
    std::vector<std::int32_t> orig(static_cast<std::size_t>(c.gate_count()), -1);
    std::vector<std::int32_t> der(static_cast<std::size_t>(c.gate_count()), -1);
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        const Gate& g = c.gate(i);
        switch (g.op) {
        case GateOp::input:
            orig[static_cast<std::size_t>(i)] = out.add_input(g.var);
            der[static_cast<std::size_t>(i)] = out.add_const(g.var == v ? 1 : 0);
            break;
        case GateOp::constant:
            orig[static_cast<std::size_t>(i)] = out.add_const(g.value);
            der[static_cast<std::size_t>(i)] = out.add_const(0);
            break;
        case GateOp::add:
            orig[static_cast<std::size_t>(i)] =
                out.add_add(orig[static_cast<std::size_t>(g.lhs)], orig[static_cast<std::size_t>(g.rhs)]);
            der[static_cast<std::size_t>(i)] =
                out.add_add(der[static_cast<std::size_t>(g.lhs)], der[static_cast<std::size_t>(g.rhs)]);
            break;
        case GateOp::mul: {
            orig[static_cast<std::size_t>(i)] =
                out.add_mul(orig[static_cast<std::size_t>(g.lhs)], orig[static_cast<std::size_t>(g.rhs)]);
            std::int32_t a =
                out.add_mul(der[static_cast<std::size_t>(g.lhs)], orig[static_cast<std::size_t>(g.rhs)]);
            std::int32_t b =
                out.add_mul(orig[static_cast<std::size_t>(g.lhs)], der[static_cast<std::size_t>(g.rhs)]);
            der[static_cast<std::size_t>(i)] = out.add_add(a, b);
            break;
        }
        }
    }
    out.set_output(der[static_cast<std::size_t>(c.output())]);
    return normalize(out);
}

namespace detail {

// Deep copy of a subformula into `out`, fresh gates throughout.
inline std::int32_t copy_subformula(const Circuit& c, std::int32_t g, Circuit& out) {
    const Gate& gate = c.gate(g);
    switch (gate.op) {
    case GateOp::input:
        return out.add_input(gate.var);
    case GateOp::constant:
        return out.add_const(gate.value);
    case GateOp::add:
        return out.add_add(copy_subformula(c, gate.lhs, out), copy_subformula(c, gate.rhs, out));
    case GateOp::mul:
        return out.add_mul(copy_subformula(c, gate.lhs, out), copy_subformula(c, gate.rhs, out));
    }
    return -1;
}

} // namespace detail

// Formula-preserving derivative: sub-formulas are duplicated where the
// product rule needs both f and df, with trivial (constant-factor)
// multiplications handled without copying. Requires a monotone formula; the
// copy-count bound relies on the absence of cancellation.
inline Circuit partial_derivative_formula(const Circuit& c, const VariableId& v) {
    if (auto rep = validate(c, Flavor::formula); !rep)
        throw std::invalid_argument("partial_derivative_formula needs a formula (" + rep.message + ")");
    if (auto rep = validate(c, Flavor::monotone); !rep)
        throw std::invalid_argument("partial_derivative_formula supports monotone formulas only");
    if (c.output() < 0) throw std::invalid_argument("circuit has no output");
    Circuit work = normalize(c); // constants folded, zero subtrees gone
    Circuit out;
    // Returns (copy of g, derivative of g); either may be reported as a
    // constant instead of a gate.
    struct R {
        bool is_const = false;
        Rational value;
        std::int32_t gate = -1;
    };
    auto materialize = [&](const R& r) -> std::int32_t {
        return r.is_const ? out.add_const(r.value) : r.gate;
    };
    auto recurse = [&](auto&& self, std::int32_t gi) -> std::pair<R, R> {
        const Gate& g = work.gate(gi);
        switch (g.op) {
        case GateOp::input: {
            R f;
            f.gate = out.add_input(g.var);
            R d;
            d.is_const = true;
            d.value = (g.var == v) ? 1 : 0;
            return {f, d};
        }
        case GateOp::constant: {
            R f;
            f.is_const = true;
            f.value = g.value;
            R d;
            d.is_const = true;
            d.value = 0;
            return {f, d};
        }
        case GateOp::add: {
            auto [fl, dl] = self(self, g.lhs);
            auto [fr, dr] = self(self, g.rhs);
            R f;
            f.gate = out.add_add(materialize(fl), materialize(fr));
            R d;
            if (dl.is_const && dl.value == 0)
                d = dr;
            else if (dr.is_const && dr.value == 0)
                d = dl;
            else
                d.gate = out.add_add(materialize(dl), materialize(dr));
            return {f, d};
        }
        case GateOp::mul: {
            // trivial multiplication: constant factor, no duplication needed
            const Gate& lg = work.gate(g.lhs);
            const Gate& rg = work.gate(g.rhs);
            if (lg.op == GateOp::constant || rg.op == GateOp::constant) {
                std::int32_t other = lg.op == GateOp::constant ? g.rhs : g.lhs;
                Rational a = (lg.op == GateOp::constant ? lg.value : rg.value);
                auto [fo, doo] = self(self, other);
                R f;
                f.gate = out.add_mul(out.add_const(a), materialize(fo));
                R d;
                if (doo.is_const && doo.value == 0) {
                    d.is_const = true;
                    d.value = 0;
                } else {
                    d.gate = out.add_mul(out.add_const(a), materialize(doo));
                }
                return {f, d};
            }
            auto [fl, dl] = self(self, g.lhs);
            auto [fr, dr] = self(self, g.rhs);
            R f;
            f.gate = out.add_mul(materialize(fl), materialize(fr));
            bool zl = dl.is_const && dl.value == 0;
            bool zr = dr.is_const && dr.value == 0;
            R d;
            if (zl && zr) {
                d.is_const = true;
                d.value = 0;
            } else if (zl) {
                d.gate = out.add_mul(detail::copy_subformula(work, g.lhs, out), materialize(dr));
            } else if (zr) {
                d.gate = out.add_mul(materialize(dl), detail::copy_subformula(work, g.rhs, out));
            } else {
                std::int32_t a = out.add_mul(materialize(dl), detail::copy_subformula(work, g.rhs, out));
                std::int32_t b = out.add_mul(detail::copy_subformula(work, g.lhs, out), materialize(dr));
                d.gate = out.add_add(a, b);
            }
            return {f, d};
        }
        }
        return {};
    };
    auto [f, d] = recurse(recurse, work.output());
    (void)f;
    out.set_output(materialize(d));
    return normalize(out);
}

// --- text format -------------------------------------------------------------------

inline std::string to_string(const Rational& q) {
    std::ostringstream o;
    o << numerator(q).str() << "/" << denominator(q).str();
    return o.str();
}

inline void serialize(const Circuit& c, std::ostream& out) {
    out << "c " << c.gate_count() << "\n";
    for (std::int32_t i = 0; i < c.gate_count(); ++i) {
        const Gate& g = c.gate(i);
        out << "g " << i << " ";
        switch (g.op) {
        case GateOp::input:
            out << "input " << to_string(g.var);
            break;
        case GateOp::constant:
            out << "const " << to_string(g.value);
            break;
        case GateOp::add:
            out << "add " << g.lhs << " " << g.rhs;
            break;
        case GateOp::mul:
            out << "mul " << g.lhs << " " << g.rhs;
            break;
        }
        out << "\n";
    }
    out << "out " << c.output() << "\n";
}

namespace detail {

inline VariableId parse_variable(const std::string& s) {
    // x[u,v] | x[(i,u),(j,v)] | w[i,j]
    auto fail = [&]() -> VariableId { throw FormatError("circuit: bad variable: " + s); };
    if (s.size() < 4 || s[1] != '[' || s.back() != ']') return fail();
    std::string body = s.substr(2, s.size() - 3);
    if (s[0] == 'w') {
        int i, j;
        if (std::sscanf(body.c_str(), "%d,%d", &i, &j) != 2) return fail();
        return VariableId::aux(i, j);
    }
    if (s[0] != 'x') return fail();
    if (!body.empty() && body[0] == '(') {
        int i, u, j, v;
        if (std::sscanf(body.c_str(), "(%d,%d),(%d,%d)", &i, &u, &j, &v) != 4) return fail();
        return VariableId::colored_edge(i, u, j, v);
    }
    int u, v;
    if (std::sscanf(body.c_str(), "%d,%d", &u, &v) != 2) return fail();
    return VariableId::host_edge(u, v);
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) throw FormatError("circuit: zero denominator: " + s);
        return Rational(num, den);
    } catch (const std::exception&) {
        throw FormatError("circuit: bad constant: " + s);
    }
}

} // namespace detail

inline Circuit parse_circuit(std::istream& in) {
    std::string line;
    Circuit c;
    int declared = -1;
    std::int32_t next_id = 0;
    bool have_out = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "c") {
            if (declared != -1) throw FormatError("circuit: duplicate header");
            if (!(ls >> declared) || declared < 0) throw FormatError("circuit: bad header: " + line);
        } else if (tag == "g") {
            std::int32_t id;
            std::string kind;
            if (declared < 0 || !(ls >> id >> kind)) throw FormatError("circuit: bad gate line: " + line);
            if (id != next_id) throw FormatError("circuit: gate ids must be 0-based and consecutive: " + line);
            ++next_id;
            try {
                if (kind == "input") {
                    std::string var;
                    if (!(ls >> var)) throw FormatError("circuit: missing variable: " + line);
                    c.add_input(detail::parse_variable(var));
                } else if (kind == "const") {
                    std::string val;
                    if (!(ls >> val)) throw FormatError("circuit: missing constant: " + line);
                    c.add_const(detail::parse_rational(val));
                } else if (kind == "add" || kind == "mul") {
                    std::int32_t l, r;
                    if (!(ls >> l >> r)) throw FormatError("circuit: bad children: " + line);
                    if (l >= id || r >= id || l < 0 || r < 0)
                        throw FormatError("circuit: children must precede parents: " + line);
                    if (kind == "add")
                        c.add_add(l, r);
                    else
                        c.add_mul(l, r);
                } else {
                    throw FormatError("circuit: unknown gate kind: " + line);
                }
            } catch (const std::invalid_argument& e) {
                throw FormatError(std::string("circuit: ") + e.what());
            }
        } else if (tag == "out") {
            std::int32_t o;
            if (!(ls >> o) || o < 0 || o >= next_id) throw FormatError("circuit: bad output line: " + line);
            c.set_output(o);
            have_out = true;
        } else {
            throw FormatError("circuit: unknown line: " + line);
        }
    }
    if (declared < 0) throw FormatError("circuit: missing header");
    if (declared != next_id)
        throw FormatError("circuit: header declares " + std::to_string(declared) + " gates, found " +
                          std::to_string(next_id));
    if (!have_out) throw FormatError("circuit: missing output line");
    return c;
}

// Balanced fan-in-2 combination helpers; wide sums become logarithmic-depth
// Add trees. An empty sum is 0, an empty product is 1.
inline std::int32_t balanced_add(Circuit& c, std::vector<std::int32_t> items) {
    if (items.empty()) return c.add_const(0);
    while (items.size() > 1) {
        std::vector<std::int32_t> next;
        for (std::size_t i = 0; i + 1 < items.size(); i += 2) next.push_back(c.add_add(items[i], items[i + 1]));
        if (items.size() % 2) next.push_back(items.back());
        items = std::move(next);
    }
    return items[0];
}

inline std::int32_t balanced_mul(Circuit& c, std::vector<std::int32_t> items) {
    if (items.empty()) return c.add_const(1);
    while (items.size() > 1) {
        std::vector<std::int32_t> next;
        for (std::size_t i = 0; i + 1 < items.size(); i += 2) next.push_back(c.add_mul(items[i], items[i + 1]));
        if (items.size() % 2) next.push_back(items.back());
        items = std::move(next);
    }
    return items[0];
}

} // namespace homcount
