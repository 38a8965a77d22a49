// acirc: command-line front end for the compositional circuit engine.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "acirc/compose.hpp"
#include "acirc/generator.hpp"
#include "acirc/oracle.hpp"

using namespace acirc;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write " + path);
    out << text;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// "X=1,Y=0" -> name/value pairs
std::map<std::string, int> parse_pairs(const std::string& s) {
    std::map<std::string, int> out;
    for (const std::string& item : split_csv(s)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw parse_error("expected name=value: " + item);
        out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    }
    return out;
}

VarSet mask_of(const Circuit& c, const std::vector<std::string>& names) {
    VarSet m = 0;
    for (const auto& n : names) {
        int v = c.var_index(n);
        if (v < 0) throw parse_error("unknown variable: " + n);
        m |= bit(v);
    }
    return m;
}

const char* b2s(bool b) { return b ? "true" : "false"; }

struct Options {
    double tol = 1e-9;
    std::uint64_t cap = 1ull << 22;
    std::uint64_t seed = 1;
    int jobs = 1; // accepted for interface stability; execution is single-threaded
};

void emit_circuit(const Circuit& c, const std::string& out_path) {
    std::string text = circuit_save(c);
    if (out_path.empty())
        std::cout << text;
    else
        spit(out_path, text);
}

// uniform per-variable probability chain over the named variables
Circuit half_weights(const Circuit& p, const std::vector<std::string>& names) {
    const Semiring* prob = lookup_semiring("prob");
    std::vector<std::pair<int, std::vector<Value>>> fs;
    for (const auto& n : names) {
        int v = p.var_index(n);
        if (v < 0) throw parse_error("unknown variable: " + n);
        int d = p.vars[size_t(v)].domain;
        fs.push_back({v, std::vector<Value>(size_t(d), Value::real(1.0 / d))});
    }
    return weight_chain(prob, p.vars, fs);
}

int run(int argc, char** argv) {
    CLI::App app{"compositional inference on semiring circuits"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--tol", opt.tol, "numeric tolerance");
    app.add_option("--cap", opt.cap, "enumeration cap");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--jobs", opt.jobs, "worker count (reserved)");

    // check
    std::string check_file, check_x, check_pair;
    bool check_full = false;
    auto* c_check = app.add_subcommand("check", "property profile of a circuit");
    c_check->add_option("file", check_file)->required();
    c_check->add_option("--x", check_x, "comma-separated variable set");
    c_check->add_option("--pair", check_pair, "second circuit for compatibility");
    c_check->add_flag("--full", check_full, "include structuredness, prod01, x-first");

    // eval
    std::string eval_file, eval_assign;
    auto* c_eval = app.add_subcommand("eval", "evaluate at an assignment");
    c_eval->add_option("file", eval_file)->required();
    c_eval->add_option("--assign", eval_assign)->required();

    // apply
    std::string ap_op, ap_file, ap_file2, ap_w, ap_map, ap_out;
    bool ap_verify = false;
    auto* c_apply = app.add_subcommand("apply", "run one operator");
    c_apply->add_option("op", ap_op, "agg | prod-cmp | prod-scmp | map")->required();
    c_apply->add_option("file", ap_file)->required();
    c_apply->add_option("file2", ap_file2, "second operand (products)");
    c_apply->add_option("--w", ap_w, "aggregation variables");
    c_apply->add_option("--mapping", ap_map, "mapping id");
    c_apply->add_option("--out", ap_out);
    c_apply->add_flag("--verify", ap_verify, "slow-path semantic certificates");

    // query
    std::string q_plan, q_builtin, q_out, q_report, q_variant = "structured";
    std::vector<std::string> q_circ;
    std::string q_x, q_y, q_z, q_h, q_iminus, q_iplus, q_ev, q_e1, q_e2, q_qvar;
    std::string q_inner = "prob", q_tau = "id@prob>maxtimes";
    int q_qval = 1;
    double q_T = 0.5;
    bool q_verify_oracle = false, q_force = false;
    auto* c_query = app.add_subcommand("query", "run a plan or builtin query");
    c_query->add_option("--plan", q_plan, "plan file (s-expression)");
    c_query->add_option("--builtin", q_builtin,
                        "two_amc | mmap | pasp_maxent | pasp_maxcredal | sdp | backdoor | "
                        "frontdoor | mfe | reverse_map");
    c_query->add_option("--circ", q_circ, "name=path circuit binding")->take_all();
    c_query->add_option("--x", q_x);
    c_query->add_option("--y", q_y);
    c_query->add_option("--z", q_z);
    c_query->add_option("--hs", q_h);
    c_query->add_option("--iminus", q_iminus);
    c_query->add_option("--iplus", q_iplus);
    c_query->add_option("--evidence", q_ev, "name=value,...");
    c_query->add_option("--e1", q_e1, "name=value,...");
    c_query->add_option("--e2", q_e2, "name=value,...");
    c_query->add_option("--qvar", q_qvar);
    c_query->add_option("--qval", q_qval);
    c_query->add_option("--threshold", q_T);
    c_query->add_option("--inner", q_inner, "inner semiring (two_amc)");
    c_query->add_option("--tau", q_tau, "translation mapping (two_amc)");
    c_query->add_option("--variant", q_variant, "backdoor: structured | zdet");
    c_query->add_option("--out", q_out);
    c_query->add_option("--report", q_report);
    c_query->add_flag("--verify-oracle", q_verify_oracle);
    c_query->add_flag("--force", q_force, "execute despite validator rejection (slow path)");

    // oracle
    std::string o_mode, o_file, o_assign, o_prop = "det", o_x, o_plan;
    std::vector<std::string> o_circ;
    auto* c_oracle = app.add_subcommand("oracle", "brute-force reference runs");
    c_oracle->add_option("mode", o_mode, "eval | plan | check")->required();
    c_oracle->add_option("file", o_file);
    c_oracle->add_option("--assign", o_assign);
    c_oracle->add_option("--prop", o_prop, "det | xdet | prod01");
    c_oracle->add_option("--x", o_x);
    c_oracle->add_option("--plan", o_plan);
    c_oracle->add_option("--circ", o_circ)->take_all();

    // gen
    std::string g_family = "mixture", g_sr = "prob", g_out;
    int g_vars = 6, g_k = 3;
    auto* c_gen = app.add_subcommand("gen", "generate a seeded random circuit");
    c_gen->add_option("--family", g_family, "mixture | xdet | det | chain | hmm");
    c_gen->add_option("--semiring", g_sr);
    c_gen->add_option("--vars", g_vars);
    c_gen->add_option("--k", g_k, "branch-variable count (xdet family)");
    c_gen->add_option("--out", g_out);

    // global options may appear before or after the subcommand name
    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors are exit 1; --help is success
    }

    auto load_bindings = [&](const std::vector<std::string>& specs) {
        std::map<std::string, Circuit> b;
        for (const std::string& s : specs) {
            auto eq = s.find('=');
            if (eq == std::string::npos) throw parse_error("expected name=path: " + s);
            b[s.substr(0, eq)] = circuit_load(slurp(s.substr(eq + 1)));
        }
        return b;
    };

    if (*c_check) {
        Circuit c = circuit_load(slurp(check_file));
        std::cout << "smooth=" << b2s(check_smooth(c)) << " decomposable="
                  << b2s(check_decomposable(c)) << " det="
                  << b2s(check_deterministic(c, opt.cap, opt.tol));
        if (!check_x.empty()) {
            VarSet x = mask_of(c, split_csv(check_x));
            std::cout << " xdet[" << check_x << "]="
                      << b2s(check_x_deterministic(c, x, opt.cap, opt.tol));
            if (check_full)
                std::cout << " xfirst[" << check_x << "]=" << b2s(check_x_first(c, x));
        }
        if (check_full)
            std::cout << " sd=" << b2s(check_structured_decomposable(c))
                      << " prod01=" << b2s(check_prod01(c, opt.cap, opt.tol).ok);
        if (!check_pair.empty()) {
            Circuit d = circuit_load(slurp(check_pair));
            std::vector<Variable> joint = merge_variables({&c, &d});
            Circuit cj = remap_variables(c, joint), dj = remap_variables(d, joint);
            VarSet x = check_x.empty() ? (cj.root_scope() & dj.root_scope())
                                       : mask_of(cj, split_csv(check_x));
            std::cout << " compatible=" << b2s(check_x_compatible(cj, dj, x));
        }
        std::cout << "\n";
        return 0;
    }

    if (*c_eval) {
        Circuit c = circuit_load(slurp(eval_file));
        Assignment a(c.vars.size(), -1);
        for (const auto& [name, val] : parse_pairs(eval_assign)) {
            int v = c.var_index(name);
            if (v < 0) throw parse_error("unknown variable: " + name);
            a[size_t(v)] = val;
        }
        Value v = circuit_evaluate(c, a);
        std::cout << "value " << c.sr->id << " " << value_to_string(v) << "\n";
        return 0;
    }

    if (*c_apply) {
        Circuit c = circuit_load(slurp(ap_file));
        TransformResult r;
        if (ap_op == "agg") {
            r = aggregate(c, mask_of(c, split_csv(ap_w)));
        } else if (ap_op == "map") {
            const Mapping* tau = lookup_mapping(ap_map, c.sr);
            MapCert cert;
            cert.det = check_deterministic(c, opt.cap, opt.tol);
            cert.prod01 = check_prod01(c, opt.cap, opt.tol).ok;
            cert.verify = ap_verify;
            r = map_elementwise(c, *tau, cert);
        } else if (ap_op == "prod-cmp" || ap_op == "prod-scmp") {
            if (ap_file2.empty()) throw parse_error("product needs two circuit files");
            Circuit d = circuit_load(slurp(ap_file2));
            std::vector<Variable> joint = merge_variables({&c, &d});
            Circuit cj = remap_variables(c, joint), dj = remap_variables(d, joint);
            if (ap_op == "prod-cmp") {
                r = product_cmp(cj, dj);
            } else {
                NodeIsomorphism io = identity_isomorphism(cj);
                VarSet x = cj.root_scope() & dj.root_scope();
                std::string why;
                if (ap_verify && !check_support_compatible(cj, dj, x, io, &why, opt.cap, opt.tol))
                    throw reject_error("support-compatibility check failed: " + why);
                r = product_scmp(cj, dj, io);
            }
        } else {
            throw parse_error("unknown apply op: " + ap_op);
        }
        emit_circuit(r.circuit, ap_out);
        return 0;
    }

    if (*c_query) {
        std::map<std::string, Circuit> bindings = load_bindings(q_circ);
        QueryPlan q;
        double sdp_T = q_T;
        if (!q_plan.empty()) {
            q.plan = plan_parse(slurp(q_plan));
            q.bindings = std::move(bindings);
        } else if (!q_builtin.empty()) {
            auto need = [&](const char* name) -> Circuit& {
                auto it = bindings.find(name);
                if (it == bindings.end())
                    throw parse_error(std::string("builtin query needs --circ ") + name + "=path");
                return it->second;
            };
            std::vector<std::string> xs = split_csv(q_x), ys = split_csv(q_y), zs = split_csv(q_z);
            if (q_builtin == "two_amc") {
                // validated route when tractable, exact small-instance fallback otherwise
                Circuit& phi = need("phi");
                const Semiring* inner = lookup_semiring(q_inner);
                const Semiring* outer = lookup_mapping(q_tau, inner)->target;
                Value v = query_two_amc(phi, xs, ys, unit_weights(inner, phi.vars, ys),
                                        unit_weights(outer, phi.vars, xs), q_inner, q_tau, opt.cap);
                std::cout << "result " << outer->id << " " << value_to_string(v) << "\n";
                return 0;
            } else if (q_builtin == "mmap") {
                Circuit& phi = need("phi");
                q = build_mmap(phi, xs, ys,
                               unit_weights(lookup_semiring("prob"), phi.vars, ys, parse_pairs(q_ev)),
                               unit_weights(lookup_semiring("maxtimes"), phi.vars, xs));
            } else if (q_builtin == "pasp_maxent" || q_builtin == "pasp_maxcredal") {
                Circuit& phi = need("phi");
                Circuit px = bindings.count("px") ? bindings.at("px") : half_weights(phi, xs);
                int qv = phi.var_index(q_qvar);
                if (qv < 0) throw parse_error("unknown query variable: " + q_qvar);
                int dom = phi.vars[size_t(qv)].domain;
                if (q_builtin == "pasp_maxent") {
                    std::vector<Value> qf;
                    for (int v = 0; v < dom; ++v) qf.push_back(Value::natpair(v == q_qval, 1));
                    Circuit wq = weight_chain(lookup_semiring("natpair"), phi.vars, {{qv, qf}});
                    q = build_pasp_maxent(phi, xs, ys, std::move(wq), std::move(px));
                } else {
                    std::vector<Value> qf;
                    for (int v = 0; v < dom; ++v) qf.push_back(Value::boolean(v == q_qval));
                    Circuit wq = weight_chain(lookup_semiring("bool"), phi.vars, {{qv, qf}});
                    q = build_pasp_maxcredal(phi, xs, ys, std::move(wq), std::move(px));
                }
            } else if (q_builtin == "sdp") {
                Circuit& phi = need("phi");
                Circuit px = bindings.count("px") ? bindings.at("px") : half_weights(phi, xs);
                std::vector<std::pair<int, std::vector<Value>>> fs;
                int qv = phi.var_index(q_qvar);
                for (const std::string& yn : ys) {
                    int v = phi.var_index(yn);
                    if (v < 0) throw parse_error("unknown variable: " + yn);
                    int dom = phi.vars[size_t(v)].domain;
                    std::vector<Value> f;
                    for (int val = 0; val < dom; ++val) {
                        double pv = 1.0 / dom;
                        if (v == qv)
                            f.push_back(Value::realpair(val == q_qval ? pv : 0.0, pv));
                        else
                            f.push_back(Value::realpair(pv, pv));
                    }
                    fs.push_back({v, std::move(f)});
                }
                Circuit wy = weight_chain(lookup_semiring("realpair"), phi.vars, fs);
                q = build_sdp(phi, xs, ys, std::move(wy), std::move(px), q_T);
            } else if (q_builtin == "backdoor") {
                q = build_backdoor(need("p"), xs, ys, zs);
            } else if (q_builtin == "frontdoor") {
                q = build_frontdoor(need("p"), xs, ys, zs);
            } else if (q_builtin == "mfe") {
                q = build_mfe(need("p"), split_csv(q_h), split_csv(q_iminus), split_csv(q_iplus),
                              parse_pairs(q_ev));
            } else if (q_builtin == "reverse_map") {
                auto e1 = parse_pairs(q_e1), e2 = parse_pairs(q_e2);
                std::vector<std::string> e1v, e2v;
                for (auto& [k, v] : e1) e1v.push_back(k);
                for (auto& [k, v] : e2) e2v.push_back(k);
                q = build_reverse_map(need("p"), xs, split_csv(q_h), e1v, e1, e2v, e2);
            } else {
                throw parse_error("unknown builtin query: " + q_builtin);
            }
        } else {
            throw parse_error("query needs --plan or --builtin");
        }

        // thresholds above 1 can never be met by a conditional probability
        if (q_builtin == "sdp" && sdp_T > 1.0) {
            std::cout << "result prob 0\n";
            return 0;
        }

        ValidatedPlan vp = plan_validate(q.plan, q.bindings, opt.cap, opt.tol);
        if (!q_report.empty()) {
            std::string rep;
            for (const auto& l : vp.report.lines) rep += l + "\n";
            rep += vp.report.ok ? "verdict: tractable\n" : "verdict: rejected\n";
            spit(q_report, rep);
        }
        if (!vp.report.ok && !q_force) {
            std::cerr << "rejected: " << vp.report.reason << "\n";
            return 2;
        }
        PlanOutcome out = plan_execute(vp, false, q_force);
        if (q_verify_oracle) {
            DenseTable ot = oracle_eval_plan(q.plan, q.bindings, opt.cap);
            DenseTable et = oracle_eval_table(out.circuit, opt.cap);
            // align: both tables index the same joint variable order
            if (ot.scope != et.scope || ot.data.size() != et.data.size())
                throw eval_error("oracle mismatch: result scopes differ");
            for (size_t i = 0; i < ot.data.size(); ++i) {
                const Value &a = et.data[i], &b = ot.data[i];
                bool ok;
                if (a.dom == Domain::Real)
                    ok = std::fabs(a.r - b.r) <=
                         opt.tol * std::max(1.0, std::max(std::fabs(a.r), std::fabs(b.r)));
                else if (a.dom == Domain::RealPair)
                    ok = std::fabs(a.r - b.r) <= opt.tol && std::fabs(a.r2 - b.r2) <= opt.tol;
                else
                    ok = (a == b);
                if (!ok)
                    throw eval_error("oracle mismatch at row " + std::to_string(i) + ": engine " +
                                     value_to_string(a) + " vs oracle " + value_to_string(b));
            }
        }
        if (out.scalar)
            std::cout << "result " << out.circuit.sr->id << " " << value_to_string(out.value)
                      << "\n";
        else
            emit_circuit(out.circuit, q_out);
        return 0;
    }

    if (*c_oracle) {
        if (o_mode == "eval") {
            Circuit c = circuit_load(slurp(o_file));
            if (!o_assign.empty()) {
                DenseTable t = oracle_eval_table(c, opt.cap);
                std::vector<int> a(c.vars.size(), 0);
                for (const auto& [name, val] : parse_pairs(o_assign)) {
                    int v = c.var_index(name);
                    if (v < 0) throw parse_error("unknown variable: " + name);
                    a[size_t(v)] = val;
                }
                std::cout << "value " << c.sr->id << " "
                          << value_to_string(t.data[oracle_detail::rank(t.vars, t.scope, a)])
                          << "\n";
            } else {
                DenseTable t = oracle_eval_table(c, opt.cap);
                std::vector<int> a(c.vars.size(), 0);
                for (std::uint64_t row = 0; row < t.data.size(); ++row) {
                    oracle_detail::unrank(t.vars, t.scope, row, a);
                    std::cout << "row";
                    for (int v : t.scope) std::cout << " " << t.vars[size_t(v)].name << "=" << a[size_t(v)];
                    std::cout << " " << value_to_string(t.data[row]) << "\n";
                }
            }
        } else if (o_mode == "plan") {
            std::map<std::string, Circuit> bindings = load_bindings(o_circ);
            PlanTree t = plan_parse(slurp(o_plan));
            DenseTable r = oracle_eval_plan(t, bindings, opt.cap);
            if (r.scope.empty())
                std::cout << "result " << r.sr->id << " " << value_to_string(r.data[0]) << "\n";
            else
                std::cout << "table " << r.sr->id << " " << r.data.size() << " rows\n";
        } else if (o_mode == "check") {
            Circuit c = circuit_load(slurp(o_file));
            bool res;
            if (o_prop == "det")
                res = oracle_check_det(c, opt.cap, opt.tol);
            else if (o_prop == "xdet")
                res = oracle_check_x_det(c, mask_of(c, split_csv(o_x)), opt.cap, opt.tol);
            else if (o_prop == "prod01")
                res = oracle_check_prod01(c, opt.cap, opt.tol);
            else
                throw parse_error("unknown property: " + o_prop);
            std::cout << o_prop << "=" << b2s(res) << "\n";
        } else {
            throw parse_error("unknown oracle mode: " + o_mode);
        }
        return 0;
    }

    if (*c_gen) {
        Circuit c = gen_named(g_family, g_sr, g_vars, g_k, opt.seed);
        emit_circuit(c, g_out);
        return 0;
    }

    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const reject_error& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
