#pragma once
// Direct-definition reference implementations of the query catalog, by full
// enumeration over dense tables.  Used to check the compositional engine.

#include <cmath>
#include <map>

#include "acirc/compose.hpp"
#include "acirc/oracle.hpp"

namespace qtest {

using namespace acirc;

using VarWeights = std::map<int, std::vector<double>>; // var -> per-value weight

inline double wprod(const VarWeights& w, const std::vector<int>& vs, const std::vector<int>& a) {
    double p = 1;
    for (int v : vs) {
        auto it = w.find(v);
        if (it != w.end()) p *= it->second[size_t(a[size_t(v)])];
    }
    return p;
}

struct Split {
    std::vector<int> xs, ys;     // x-vars and the rest, sorted
    std::uint64_t nx = 1, ny = 1;
};

inline Split split_scope(const DenseTable& t, VarSet xm) {
    Split s;
    for (int v : t.scope) {
        if (xm & (VarSet(1) << v)) s.xs.push_back(v);
        else s.ys.push_back(v);
    }
    s.nx = oracle_detail::span(t.vars, s.xs);
    s.ny = oracle_detail::span(t.vars, s.ys);
    return s;
}

// the double aggregate itself, with unit weights: outer over X, inner over the rest
inline Value q_two_amc(const Circuit& phi, VarSet xm, const Semiring* inner, const Mapping* tau) {
    const Semiring* outer = tau->target;
    const Mapping* sup = lookup_mapping("support@bool>" + inner->id);
    DenseTable t = oracle_eval_table(phi);
    Split s = split_scope(t, xm);
    std::vector<int> a(t.vars.size(), 0);
    Value out = outer->zero;
    for (std::uint64_t rx = 0; rx < s.nx; ++rx) {
        oracle_detail::unrank(t.vars, s.xs, rx, a);
        Value in = inner->zero;
        for (std::uint64_t ry = 0; ry < s.ny; ++ry) {
            oracle_detail::unrank(t.vars, s.ys, ry, a);
            in = inner->add(in, sup->apply(t.data[oracle_detail::rank(t.vars, t.scope, a)]));
        }
        out = outer->add(out, tau->apply(in));
    }
    return out;
}

// max over X-assignments of the wy-weighted count of satisfying completions
inline double q_mmap(const Circuit& phi, VarSet xm, const VarWeights& wy = {}) {
    DenseTable t = oracle_eval_table(phi);
    Split s = split_scope(t, xm);
    std::vector<int> a(t.vars.size(), 0);
    double best = 0;
    for (std::uint64_t rx = 0; rx < s.nx; ++rx) {
        oracle_detail::unrank(t.vars, s.xs, rx, a);
        double sum = 0;
        for (std::uint64_t ry = 0; ry < s.ny; ++ry) {
            oracle_detail::unrank(t.vars, s.ys, ry, a);
            if (t.data[oracle_detail::rank(t.vars, t.scope, a)].b) sum += wprod(wy, s.ys, a);
        }
        best = std::max(best, sum);
    }
    return best;
}

// sum over X of px(x) * (#{y : phi, qvar=1} / #{y : phi}), with 0/0 = 0
inline double q_pasp_maxent(const Circuit& phi, VarSet xm, int qvar, const VarWeights& px = {}) {
    DenseTable t = oracle_eval_table(phi);
    Split s = split_scope(t, xm);
    std::vector<int> a(t.vars.size(), 0);
    double out = 0;
    for (std::uint64_t rx = 0; rx < s.nx; ++rx) {
        oracle_detail::unrank(t.vars, s.xs, rx, a);
        std::uint64_t cnt = 0, cntq = 0;
        for (std::uint64_t ry = 0; ry < s.ny; ++ry) {
            oracle_detail::unrank(t.vars, s.ys, ry, a);
            if (!t.data[oracle_detail::rank(t.vars, t.scope, a)].b) continue;
            ++cnt;
            if (a[size_t(qvar)] == 1) ++cntq;
        }
        double ratio = cnt ? double(cntq) / double(cnt) : 0.0;
        out += wprod(px, s.xs, a) * ratio;
    }
    return out;
}

// sum over X of px(x) * [exists y consistent with pin : phi]
inline double q_pasp_maxcredal(const Circuit& phi, VarSet xm, const std::map<int, int>& pin = {},
                               const VarWeights& px = {}) {
    DenseTable t = oracle_eval_table(phi);
    Split s = split_scope(t, xm);
    std::vector<int> a(t.vars.size(), 0);
    double out = 0;
    for (std::uint64_t rx = 0; rx < s.nx; ++rx) {
        oracle_detail::unrank(t.vars, s.xs, rx, a);
        bool any = false;
        for (std::uint64_t ry = 0; ry < s.ny && !any; ++ry) {
            oracle_detail::unrank(t.vars, s.ys, ry, a);
            bool ok = true;
            for (const auto& [v, val] : pin)
                if (a[size_t(v)] != val) ok = false;
            any = ok && t.data[oracle_detail::rank(t.vars, t.scope, a)].b;
        }
        if (any) out += wprod(px, s.xs, a);
    }
    return out;
}

// sum over X of px(x) * [ (weighted mass of {y : phi, dvar=1}) >= T * (mass of {y : phi}) ],
// with an all-zero numerator/denominator pair mapping to 0
inline double q_sdp(const Circuit& phi, VarSet xm, int dvar, double T, const VarWeights& wy = {},
                    const VarWeights& px = {}) {
    DenseTable t = oracle_eval_table(phi);
    Split s = split_scope(t, xm);
    std::vector<int> a(t.vars.size(), 0);
    double out = 0;
    for (std::uint64_t rx = 0; rx < s.nx; ++rx) {
        oracle_detail::unrank(t.vars, s.xs, rx, a);
        double num = 0, den = 0;
        for (std::uint64_t ry = 0; ry < s.ny; ++ry) {
            oracle_detail::unrank(t.vars, s.ys, ry, a);
            if (!t.data[oracle_detail::rank(t.vars, t.scope, a)].b) continue;
            double w = wprod(wy, s.ys, a);
            den += w;
            if (a[size_t(dvar)] == 1) num += w;
        }
        double val = (num == 0 && den == 0) ? 0.0 : (num >= den * T ? 1.0 : 0.0);
        out += wprod(px, s.xs, a) * val;
    }
    return out;
}

// sum_z p(z) p(y | x, z), table over X u Y; 1/0 treated as 0 like the engine
inline std::map<std::vector<int>, double> q_backdoor(const Circuit& p, VarSet xm, VarSet ym,
                                                     VarSet zm) {
    DenseTable t = oracle_eval_table(p);
    std::vector<int> xs = oracle_detail::sorted_vars(xm), ys = oracle_detail::sorted_vars(ym),
                     zs = oracle_detail::sorted_vars(zm);
    std::uint64_t nx = oracle_detail::span(t.vars, xs), ny = oracle_detail::span(t.vars, ys),
                  nz = oracle_detail::span(t.vars, zs);
    std::vector<int> a(t.vars.size(), 0);
    auto p_of = [&](const std::vector<int>& a2) {
        return t.data[oracle_detail::rank(t.vars, t.scope, a2)].r;
    };
    std::map<std::vector<int>, double> out;
    for (std::uint64_t rx = 0; rx < nx; ++rx) {
        oracle_detail::unrank(t.vars, xs, rx, a);
        for (std::uint64_t ry = 0; ry < ny; ++ry) {
            oracle_detail::unrank(t.vars, ys, ry, a);
            double sum = 0;
            for (std::uint64_t rz = 0; rz < nz; ++rz) {
                oracle_detail::unrank(t.vars, zs, rz, a);
                // p(z)
                double pz = 0, pxz = 0, pxyz = p_of(a);
                std::vector<int> b = a;
                for (std::uint64_t qx = 0; qx < nx; ++qx) {
                    oracle_detail::unrank(t.vars, xs, qx, b);
                    for (std::uint64_t qy = 0; qy < ny; ++qy) {
                        oracle_detail::unrank(t.vars, ys, qy, b);
                        pz += p_of(b);
                    }
                }
                b = a;
                for (std::uint64_t qy = 0; qy < ny; ++qy) {
                    oracle_detail::unrank(t.vars, ys, qy, b);
                    pxz += p_of(b);
                }
                sum += pz * pxyz * (pxz == 0 ? 0.0 : 1.0 / pxz);
            }
            std::vector<int> key;
            for (int v : xs) key.push_back(a[size_t(v)]);
            for (int v : ys) key.push_back(a[size_t(v)]);
            out[key] = sum;
        }
    }
    return out;
}

// sum_z p(z|x) sum_x' p(x') p(y|x',z), table over X u Y
inline std::map<std::vector<int>, double> q_frontdoor(const Circuit& p, VarSet xm, VarSet ym,
                                                      VarSet zm) {
    DenseTable t = oracle_eval_table(p);
    std::vector<int> xs = oracle_detail::sorted_vars(xm), ys = oracle_detail::sorted_vars(ym),
                     zs = oracle_detail::sorted_vars(zm);
    std::uint64_t nx = oracle_detail::span(t.vars, xs), ny = oracle_detail::span(t.vars, ys),
                  nz = oracle_detail::span(t.vars, zs);
    std::vector<int> a(t.vars.size(), 0);
    auto p_of = [&](const std::vector<int>& a2) {
        return t.data[oracle_detail::rank(t.vars, t.scope, a2)].r;
    };
    auto marg = [&](std::vector<int> base, const std::vector<int>& over1,
                    const std::vector<int>& over2) {
        std::uint64_t n1 = oracle_detail::span(t.vars, over1), n2 = oracle_detail::span(t.vars, over2);
        double s = 0;
        for (std::uint64_t r1 = 0; r1 < n1; ++r1) {
            oracle_detail::unrank(t.vars, over1, r1, base);
            for (std::uint64_t r2 = 0; r2 < n2; ++r2) {
                oracle_detail::unrank(t.vars, over2, r2, base);
                s += p_of(base);
            }
        }
        return s;
    };
    std::map<std::vector<int>, double> out;
    for (std::uint64_t rx = 0; rx < nx; ++rx) {
        oracle_detail::unrank(t.vars, xs, rx, a);
        for (std::uint64_t ry = 0; ry < ny; ++ry) {
            oracle_detail::unrank(t.vars, ys, ry, a);
            double sum = 0;
            for (std::uint64_t rz = 0; rz < nz; ++rz) {
                oracle_detail::unrank(t.vars, zs, rz, a);
                double px = marg(a, ys, zs);
                double pxz = marg(a, ys, {});
                double pz_given_x = px == 0 ? 0.0 : pxz / px;
                double inner = 0;
                std::vector<int> b = a;
                for (std::uint64_t qx = 0; qx < nx; ++qx) {
                    oracle_detail::unrank(t.vars, xs, qx, b);
                    double pxp = marg(b, ys, zs);
                    double pxzp = marg(b, ys, {});
                    double pyxz = p_of(b);
                    inner += pxp * pyxz * (pxzp == 0 ? 0.0 : 1.0 / pxzp);
                }
                sum += pz_given_x * inner;
            }
            std::vector<int> key;
            for (int v : xs) key.push_back(a[size_t(v)]);
            for (int v : ys) key.push_back(a[size_t(v)]);
            out[key] = sum;
        }
    }
    return out;
}

// max_h #{i- : p(h, i-) maximal over h'} after dropping I+ and conditioning on evidence
inline std::uint64_t q_mfe(const Circuit& p, VarSet hm, VarSet im, VarSet iplus,
                           const std::map<int, int>& evidence) {
    DenseTable t0 = oracle_eval_table(p);
    // fold in evidence, then marginalize I+ and the evidence variables
    DenseTable t = t0;
    std::vector<int> a(t.vars.size(), 0);
    for (std::uint64_t row = 0; row < t.data.size(); ++row) {
        oracle_detail::unrank(t.vars, t.scope, row, a);
        for (const auto& [v, val] : evidence)
            if (a[size_t(v)] != val) t.data[row] = Value::real(0);
    }
    VarSet drop = iplus;
    for (const auto& [v, val] : evidence) drop |= VarSet(1) << v;
    t = oracle_agg(t, drop);
    std::vector<int> hs = oracle_detail::sorted_vars(hm), is = oracle_detail::sorted_vars(im);
    std::uint64_t nh = oracle_detail::span(t.vars, hs), ni = oracle_detail::span(t.vars, is);
    auto p_of = [&](const std::vector<int>& a2) {
        return t.data[oracle_detail::rank(t.vars, t.scope, a2)].r;
    };
    std::uint64_t best = 0;
    for (std::uint64_t rh = 0; rh < nh; ++rh) {
        oracle_detail::unrank(t.vars, hs, rh, a);
        std::uint64_t votes = 0;
        for (std::uint64_t ri = 0; ri < ni; ++ri) {
            oracle_detail::unrank(t.vars, is, ri, a);
            double mine = p_of(a);
            double top = 0;
            std::vector<int> b = a;
            for (std::uint64_t qh = 0; qh < nh; ++qh) {
                oracle_detail::unrank(t.vars, hs, qh, b);
                top = std::max(top, p_of(b));
            }
            // mirror the engine's indicator: ratio within 1e-9 of one
            double ratio = top == 0 ? 0.0 : mine / top;
            if (std::fabs(ratio - 1.0) <= 1e-9) ++votes;
        }
        best = std::max(best, votes);
    }
    return best;
}

// max_x p(e1 | x, e2), evidence maps var -> pinned value
inline double q_reverse_map(const Circuit& p, VarSet xm, VarSet hm, const std::map<int, int>& e1,
                            const std::map<int, int>& e2) {
    DenseTable t = oracle_eval_table(p);
    std::vector<int> xs = oracle_detail::sorted_vars(xm);
    VarSet rest = 0;
    for (int v : t.scope) rest |= VarSet(1) << v;
    rest &= ~xm;
    std::vector<int> ys = oracle_detail::sorted_vars(rest); // H u E1 u E2
    std::uint64_t nx = oracle_detail::span(t.vars, xs), ny = oracle_detail::span(t.vars, ys);
    std::vector<int> a(t.vars.size(), 0);
    auto consistent = [&](const std::map<int, int>& e) {
        for (const auto& [v, val] : e)
            if (a[size_t(v)] != val) return false;
        return true;
    };
    double best = 0;
    for (std::uint64_t rx = 0; rx < nx; ++rx) {
        oracle_detail::unrank(t.vars, xs, rx, a);
        double num = 0, den = 0;
        for (std::uint64_t ry = 0; ry < ny; ++ry) {
            oracle_detail::unrank(t.vars, ys, ry, a);
            if (!consistent(e2)) continue;
            double v = t.data[oracle_detail::rank(t.vars, t.scope, a)].r;
            den += v;
            if (consistent(e1)) num += v;
        }
        double val = den == 0 ? 0.0 : num / den;
        best = std::max(best, val);
    }
    return best;
}

} // namespace qtest
