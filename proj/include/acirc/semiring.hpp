#pragma once
// Semiring value domains, builtin semirings, and elementwise mappings between them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acirc {

// exit code 1: I/O, parse, or usage problems
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// exit code 2: tractability / certificate rejection
struct reject_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// internal contract violations (bad arguments, overflow, caps)
struct eval_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Domain { Real, Boolean, Natural, NatPair, RealPair };

struct Value {
    Domain dom = Domain::Real;
    double r = 0, r2 = 0;
    bool b = false;
    std::uint64_t n = 0, n2 = 0;

    static Value real(double x) { Value v; v.dom = Domain::Real; v.r = x; return v; }
    static Value boolean(bool x) { Value v; v.dom = Domain::Boolean; v.b = x; return v; }
    static Value natural(std::uint64_t x) { Value v; v.dom = Domain::Natural; v.n = x; return v; }
    static Value natpair(std::uint64_t a, std::uint64_t c) {
        Value v; v.dom = Domain::NatPair; v.n = a; v.n2 = c; return v;
    }
    static Value realpair(double a, double c) {
        Value v; v.dom = Domain::RealPair; v.r = a; v.r2 = c; return v;
    }

    bool operator==(const Value& o) const {
        if (dom != o.dom) return false;
        switch (dom) {
            case Domain::Real: return r == o.r;
            case Domain::Boolean: return b == o.b;
            case Domain::Natural: return n == o.n;
            case Domain::NatPair: return n == o.n && n2 == o.n2;
            case Domain::RealPair: return r == o.r && r2 == o.r2;
        }
        return false;
    }
};

inline std::uint64_t nat_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t c;
    if (__builtin_add_overflow(a, b, &c)) throw eval_error("natural overflow in add");
    return c;
}
inline std::uint64_t nat_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t c;
    if (__builtin_mul_overflow(a, b, &c)) throw eval_error("natural overflow in mul");
    return c;
}

enum class SemiringKind { Prob, MaxTimes, Bool, Counting, NatPair, RealPair };

struct Semiring {
    std::string id;
    SemiringKind kind;
    Domain dom;
    bool idempotent_add = false;
    bool zero_sum_free = true;
    Value zero, one;

    Value add(const Value& a, const Value& b) const {
        check(a); check(b);
        switch (kind) {
            case SemiringKind::Prob: return Value::real(a.r + b.r);
            case SemiringKind::MaxTimes: return Value::real(a.r > b.r ? a.r : b.r);
            case SemiringKind::Bool: return Value::boolean(a.b || b.b);
            case SemiringKind::Counting: return Value::natural(nat_add(a.n, b.n));
            case SemiringKind::NatPair: return Value::natpair(nat_add(a.n, b.n), nat_add(a.n2, b.n2));
            case SemiringKind::RealPair: return Value::realpair(a.r + b.r, a.r2 + b.r2);
        }
        throw eval_error("bad semiring kind");
    }
    Value mul(const Value& a, const Value& b) const {
        check(a); check(b);
        switch (kind) {
            case SemiringKind::Prob:
            case SemiringKind::MaxTimes: return Value::real(a.r * b.r);
            case SemiringKind::Bool: return Value::boolean(a.b && b.b);
            case SemiringKind::Counting: return Value::natural(nat_mul(a.n, b.n));
            case SemiringKind::NatPair: return Value::natpair(nat_mul(a.n, b.n), nat_mul(a.n2, b.n2));
            case SemiringKind::RealPair: return Value::realpair(a.r * b.r, a.r2 * b.r2);
        }
        throw eval_error("bad semiring kind");
    }

    void check(const Value& v) const {
        if (v.dom != dom) throw eval_error("value domain does not match semiring " + id);
    }
};

inline const std::vector<Semiring>& builtin_semirings() {
    static const std::vector<Semiring> regs = [] {
        std::vector<Semiring> v;
        auto mk = [&](const char* id, SemiringKind k, Domain d, bool idem, Value z, Value o) {
            Semiring s;
            s.id = id; s.kind = k; s.dom = d;
            s.idempotent_add = idem; s.zero_sum_free = true;
            s.zero = z; s.one = o;
            v.push_back(s);
        };
        mk("prob", SemiringKind::Prob, Domain::Real, false, Value::real(0), Value::real(1));
        mk("maxtimes", SemiringKind::MaxTimes, Domain::Real, true, Value::real(0), Value::real(1));
        mk("bool", SemiringKind::Bool, Domain::Boolean, true, Value::boolean(false), Value::boolean(true));
        mk("counting", SemiringKind::Counting, Domain::Natural, false, Value::natural(0), Value::natural(1));
        mk("natpair", SemiringKind::NatPair, Domain::NatPair, false, Value::natpair(0, 0), Value::natpair(1, 1));
        mk("realpair", SemiringKind::RealPair, Domain::RealPair, false, Value::realpair(0, 0), Value::realpair(1, 1));
        return v;
    }();
    return regs;
}

inline const Semiring* lookup_semiring(const std::string& id) {
    for (const auto& s : builtin_semirings())
        if (s.id == id) return &s;
    throw parse_error("unknown semiring id: " + id);
}

inline bool value_is_zero(const Value& v, const Semiring& s, double tol = 1e-12) {
    s.check(v);
    switch (s.dom) {
        case Domain::Real: return std::fabs(v.r) <= tol;
        case Domain::Boolean: return !v.b;
        case Domain::Natural: return v.n == 0;
        case Domain::NatPair: return v.n == 0 && v.n2 == 0;
        case Domain::RealPair: return std::fabs(v.r) <= tol && std::fabs(v.r2) <= tol;
    }
    return false;
}

inline bool value_is_one(const Value& v, const Semiring& s, double tol = 1e-12) {
    s.check(v);
    switch (s.dom) {
        case Domain::Real: return std::fabs(v.r - 1.0) <= tol;
        case Domain::Boolean: return v.b;
        case Domain::Natural: return v.n == 1;
        case Domain::NatPair: return v.n == 1 && v.n2 == 1;
        case Domain::RealPair: return std::fabs(v.r - 1.0) <= tol && std::fabs(v.r2 - 1.0) <= tol;
    }
    return false;
}

// ---- value text form (used verbatim in circuit files) ----

inline std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string value_to_string(const Value& v) {
    switch (v.dom) {
        case Domain::Real: return format_real(v.r);
        case Domain::Boolean: return v.b ? "1" : "0";
        case Domain::Natural: return std::to_string(v.n);
        case Domain::NatPair: return "(" + std::to_string(v.n) + "," + std::to_string(v.n2) + ")";
        case Domain::RealPair: return "(" + format_real(v.r) + "," + format_real(v.r2) + ")";
    }
    return "?";
}

inline Value value_from_string(const std::string& tok, const Semiring& s) {
    try {
        switch (s.dom) {
            case Domain::Real: return Value::real(std::stod(tok));
            case Domain::Boolean:
                if (tok == "0") return Value::boolean(false);
                if (tok == "1") return Value::boolean(true);
                throw parse_error("bad boolean literal: " + tok);
            case Domain::Natural: return Value::natural(std::stoull(tok));
            case Domain::NatPair:
            case Domain::RealPair: {
                if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')')
                    throw parse_error("bad pair literal: " + tok);
                auto comma = tok.find(',');
                if (comma == std::string::npos) throw parse_error("bad pair literal: " + tok);
                std::string a = tok.substr(1, comma - 1);
                std::string b = tok.substr(comma + 1, tok.size() - comma - 2);
                if (s.dom == Domain::NatPair) return Value::natpair(std::stoull(a), std::stoull(b));
                return Value::realpair(std::stod(a), std::stod(b));
            }
        }
    } catch (const std::invalid_argument&) {
        throw parse_error("bad value literal: " + tok);
    } catch (const std::out_of_range&) {
        throw parse_error("value literal out of range: " + tok);
    }
    throw parse_error("bad value literal: " + tok);
}

// ---- elementwise mappings ----

struct Mapping {
    std::string id;
    const Semiring* source = nullptr;
    const Semiring* target = nullptr;
    bool preserves_zero = true;
    bool additive_hom = false;
    bool multiplicative_hom = false;
    bool maps_one_to_one = false;
    // runtime restriction of the source domain, checked on materialized tables
    bool restrict_unit_interval = false;
    std::function<Value(const Value&)> apply;
};

namespace detail {

inline bool has_zero_divisors(const Semiring& s) {
    return s.kind == SemiringKind::NatPair || s.kind == SemiringKind::RealPair;
}

inline Mapping make_support(const Semiring& src, const Semiring& dst) {
    Mapping m;
    m.id = "support@" + src.id + ">" + dst.id;
    m.source = &src;
    m.target = &dst;
    m.additive_hom = src.zero_sum_free && dst.idempotent_add;
    m.multiplicative_hom = !has_zero_divisors(src);
    m.maps_one_to_one = true;
    const Semiring* s = &src;
    const Semiring* d = &dst;
    m.apply = [s, d](const Value& v) { return value_is_zero(v, *s) ? d->zero : d->one; };
    return m;
}

inline Mapping make_identity(const Semiring& src, const Semiring& dst) {
    Mapping m;
    m.id = "id@" + src.id + ">" + dst.id;
    m.source = &src;
    m.target = &dst;
    m.multiplicative_hom = true;
    m.maps_one_to_one = true;
    // additive only when the additions coincide
    m.additive_hom = (src.kind == dst.kind);
    Domain sd = src.dom, dd = dst.dom;
    m.apply = [sd, dd](const Value& v) {
        if (sd == dd) return v;
        if (sd == Domain::Natural && dd == Domain::Real) return Value::real(double(v.n));
        throw eval_error("unsupported identity conversion");
    };
    return m;
}

} // namespace detail

// Looks up a mapping id, e.g. "support@bool>prob", "id@prob>maxtimes", "tau_inv",
// "tau_pow:2", "ratio", "sdp_threshold:0.5", "indicator_eq_one".  Unqualified
// single-semiring ids (tau_inv, tau_pow) resolve against src_hint (default prob).
inline const Mapping* lookup_mapping(const std::string& id, const Semiring* src_hint = nullptr) {
    static std::map<std::string, Mapping> cache;
    const Semiring* prob = lookup_semiring("prob");
    const Semiring* maxtimes = lookup_semiring("maxtimes");
    const Semiring* counting = lookup_semiring("counting");
    const Semiring* natpair = lookup_semiring("natpair");
    const Semiring* realpair = lookup_semiring("realpair");

    std::string key = id;
    if ((id == "tau_inv" || id.rfind("tau_pow:", 0) == 0) && src_hint && src_hint != prob)
        key += "@" + src_hint->id;
    auto it = cache.find(key);
    if (it != cache.end()) return &it->second;

    Mapping m;
    if (id.rfind("support@", 0) == 0) {
        auto sep = id.find('>');
        if (sep == std::string::npos) throw parse_error("bad mapping id: " + id);
        const Semiring* s = lookup_semiring(id.substr(8, sep - 8));
        const Semiring* d = lookup_semiring(id.substr(sep + 1));
        m = detail::make_support(*s, *d);
    } else if (id.rfind("id@", 0) == 0) {
        auto sep = id.find('>');
        if (sep == std::string::npos) throw parse_error("bad mapping id: " + id);
        std::string s = id.substr(3, sep - 3), d = id.substr(sep + 1);
        if (!((s == "prob" && d == "maxtimes") || (s == "counting" && d == "maxtimes") ||
              (s == "maxtimes" && d == "prob")))
            throw parse_error("unsupported identity mapping: " + id);
        m = detail::make_identity(*lookup_semiring(s), *lookup_semiring(d));
    } else if (id == "tau_inv") {
        const Semiring* s = (src_hint && src_hint == maxtimes) ? maxtimes : prob;
        m.id = id;
        m.source = s;
        m.target = s;
        m.multiplicative_hom = true;
        m.maps_one_to_one = true;
        m.apply = [](const Value& v) { return Value::real(v.r == 0 ? 0.0 : 1.0 / v.r); };
    } else if (id.rfind("tau_pow:", 0) == 0) {
        double beta = std::stod(id.substr(8));
        const Semiring* s = (src_hint && src_hint == maxtimes) ? maxtimes : prob;
        m.id = id;
        m.source = s;
        m.target = s;
        m.multiplicative_hom = true;
        m.maps_one_to_one = true;
        m.additive_hom = (s == maxtimes && beta > 0); // max is monotone under x^b, b>0
        m.apply = [beta](const Value& v) {
            return Value::real(v.r == 0 ? 0.0 : std::pow(v.r, beta));
        };
    } else if (id == "ratio") {
        m.id = id;
        m.source = natpair;
        m.target = prob;
        m.multiplicative_hom = true;
        m.maps_one_to_one = true;
        m.apply = [](const Value& v) {
            if (v.n2 == 0) return Value::real(0.0); // 0/0 = 0
            return Value::real(double(v.n) / double(v.n2));
        };
    } else if (id.rfind("sdp_threshold:", 0) == 0) {
        double T = std::stod(id.substr(14));
        m.id = id;
        m.source = realpair;
        m.target = prob;
        m.maps_one_to_one = (T <= 1.0);
        m.apply = [T](const Value& v) {
            if (v.r == 0 && v.r2 == 0) return Value::real(0.0);
            return Value::real(v.r >= v.r2 * T ? 1.0 : 0.0);
        };
    } else if (id == "indicator_eq_one") {
        m.id = id;
        m.source = prob;
        m.target = counting;
        m.multiplicative_hom = true; // on the [0,1]-restricted domain
        m.maps_one_to_one = true;
        m.restrict_unit_interval = true;
        m.apply = [](const Value& v) {
            return Value::natural(std::fabs(v.r - 1.0) <= 1e-9 ? 1 : 0);
        };
    } else {
        throw parse_error("unknown mapping id: " + id);
    }
    auto [pos, ok] = cache.emplace(key, std::move(m));
    (void)ok;
    return &pos->second;
}

inline std::vector<const Mapping*> registry_builtin_mappings() {
    std::vector<const Mapping*> out;
    for (const auto& s : builtin_semirings())
        for (const auto& d : builtin_semirings())
            out.push_back(lookup_mapping("support@" + s.id + ">" + d.id));
    out.push_back(lookup_mapping("id@prob>maxtimes"));
    out.push_back(lookup_mapping("id@counting>maxtimes"));
    out.push_back(lookup_mapping("id@maxtimes>prob"));
    out.push_back(lookup_mapping("tau_inv"));
    out.push_back(lookup_mapping("tau_pow:2"));
    out.push_back(lookup_mapping("ratio"));
    out.push_back(lookup_mapping("sdp_threshold:0.5"));
    out.push_back(lookup_mapping("indicator_eq_one"));
    return out;
}

} // namespace acirc
