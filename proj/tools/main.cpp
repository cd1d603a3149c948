// repcomm command-line driver.
#include "repcomm/bounds.hpp"
#include "repcomm/equilibrium_machine.hpp"
#include "repcomm/occupation_lp.hpp"
#include "repcomm/punishment_machine.hpp"
#include "repcomm/simulator.hpp"
#include "repcomm/trace_io.hpp"
#include "repcomm/verifier.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef REPCOMM_VERSION
#define REPCOMM_VERSION "0.0.0"
#endif

using namespace repcomm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitVerifyFailed = 2;
constexpr const char* kOutDirEnv = "REPCOMM_OUTPUT_DIR";

struct RunConfig {
    GameParams g;
    bool prior_set = false;
    double rho = 0.3;
    std::optional<double> rho_prime;
    std::vector<double> eps_list{0.0};
    std::size_t horizon = 3000;
    std::size_t num_paths = 1000;
    std::uint64_t seed = 1;
    std::string preset = "target";
    std::string output_dir;
    std::optional<std::size_t> type;  // 1-based
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected a nonnegative integer, got '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ValidationError(key + ": empty list");
    return out;
}

// a:b:step, inclusive of b up to rounding.
std::vector<double> parse_range(const std::string& key, const std::string& v) {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw ValidationError(key + ": expected a:b:step, got '" + v + "'");
    double a = parse_double(key, parts[0]), b = parse_double(key, parts[1]), st = parse_double(key, parts[2]);
    if (!(st > 0.0) || b < a) throw ValidationError(key + ": need step > 0 and b >= a");
    std::vector<double> out;
    for (long i = 0;; ++i) {
        double x = a + static_cast<double>(i) * st;
        if (x > b + 1e-9 * st) break;
        out.push_back(std::round(x * 1e12) / 1e12);
    }
    return out;
}

void apply(RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "p_h") c.g.p_h = parse_double(key, v);
    else if (key == "delta") c.g.delta = parse_double(key, v);
    else if (key == "costs") c.g.costs = parse_list(key, v);
    else if (key == "prior") { c.g.prior = parse_list(key, v); c.prior_set = true; }
    else if (key == "view") c.g.view = parse_view(v);
    else if (key == "rho") c.rho = parse_double(key, v);
    else if (key == "rho_prime") c.rho_prime = parse_double(key, v);
    else if (key == "eps_list") c.eps_list = parse_list(key, v);
    else if (key == "horizon") c.horizon = parse_uint(key, v);
    else if (key == "num_paths") c.num_paths = parse_uint(key, v);
    else if (key == "seed") c.seed = parse_uint(key, v);
    else if (key == "preset") { parse_preset(v); c.preset = v; }
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "type") c.type = parse_uint(key, v);
    else throw ValidationError("unknown config key '" + key + "'");
}

void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        apply(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
    return s;
}

std::string canonical(const RunConfig& c) {
    std::ostringstream os;
    os << "costs=" << join(c.g.costs) << "\ndelta=" << fmt(c.g.delta) << "\neps_list=" << join(c.eps_list)
       << "\nhorizon=" << c.horizon << "\nnum_paths=" << c.num_paths << "\np_h=" << fmt(c.g.p_h)
       << "\npreset=" << c.preset << "\nprior=" << join(c.g.prior) << "\nrho=" << fmt(c.rho)
       << "\nrho_prime=" << (c.rho_prime ? fmt(*c.rho_prime) : "") << "\nseed=" << c.seed
       << "\ntype=" << (c.type ? std::to_string(*c.type) : "") << "\nview=" << to_string(c.g.view) << '\n';
    return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Flags shared by all subcommands; each maps onto a config key.
struct Flags {
    std::string config;
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> opts;

    void add(CLI::App* app) {
        app->add_option("--config", config, "key = value config file; flags override it");
        const std::pair<const char*, const char*> table[] = {
            {"--ph", "p_h"},       {"--delta", "delta"},         {"--costs", "costs"},   {"--prior", "prior"},
            {"--view", "view"},    {"--rho", "rho"},             {"--rho-prime", "rho_prime"},
            {"--eps", "eps_list"}, {"--horizon", "horizon"},     {"--paths", "num_paths"},
            {"--seed", "seed"},    {"--preset", "preset"},       {"--type", "type"},
            {"--out-dir", "output_dir"}};
        for (auto [flag, key] : table) opts.emplace_back(key, app->add_option(flag, values[key], key));
    }

    RunConfig resolve() const {
        RunConfig c;
        if (!config.empty()) load_config_file(c, config);
        for (const auto& [key, opt] : opts)
            if (opt->count() > 0) apply(c, key, values.at(key));
        if (!c.prior_set) c.g.prior.assign(c.g.costs.size(), 1.0 / static_cast<double>(c.g.costs.size()));
        if (c.output_dir.empty())
            if (const char* env = std::getenv(kOutDirEnv)) c.output_dir = env;
        if (c.type && (*c.type < 1 || *c.type > c.g.costs.size()))
            throw ValidationError("type: must lie in 1.." + std::to_string(c.g.costs.size()));
        return c;
    }
};

// CSV sink: a file under the output directory, or stdout.
class Sink {
public:
    Sink(const RunConfig& c, const std::string& command, const std::string& name) {
        if (!c.output_dir.empty()) {
            std::filesystem::create_directories(c.output_dir);
            path_ = (std::filesystem::path(c.output_dir) / (name + ".csv")).string();
            file_ = std::make_unique<std::ofstream>(path_);
            if (!*file_) throw ValidationError("output_dir: cannot write '" + path_ + "'");
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "# repcomm %s command=%s config_hash=%016llx seed=%llu\n", REPCOMM_VERSION,
                      command.c_str(), static_cast<unsigned long long>(fnv1a(canonical(c))),
                      static_cast<unsigned long long>(c.seed));
        out() << buf;
    }
    explicit Sink(const std::string& path, const RunConfig& c, const std::string& command) : path_(path) {
        file_ = std::make_unique<std::ofstream>(path_);
        if (!*file_) throw ValidationError("cannot write '" + path_ + "'");
        char buf[160];
        std::snprintf(buf, sizeof buf, "# repcomm %s command=%s config_hash=%016llx seed=%llu\n", REPCOMM_VERSION,
                      command.c_str(), static_cast<unsigned long long>(fnv1a(canonical(c))),
                      static_cast<unsigned long long>(c.seed));
        out() << buf;
    }
    std::ostream& out() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

std::optional<std::string> trace_path(const RunConfig& c, const std::string& flag, const std::string& name) {
    if (!flag.empty()) return flag;
    if (!c.output_dir.empty()) return (std::filesystem::path(c.output_dir) / (name + ".csv")).string();
    return std::nullopt;
}

// Subcommands ---------------------------------------------------------------

int cmd_bounds(const RunConfig& c) {
    c.g.validate(false);
    Sink sink(c, "bounds", "bounds");
    auto& os = sink.out();
    os << "bound";
    for (std::size_t j = 1; j <= c.g.n(); ++j) os << ",v_" << j;
    os << '\n';
    auto row = [&](const char* name, const PayoffVector& v) {
        os << name;
        for (double x : v) os << ',' << fmt(x);
        os << '\n';
    };
    row("v_star", v_star(c.g));
    row("v_star_star", v_star_star(c.g));
    row("v_dagger", v_dagger(c.g));
    return kExitOk;
}

struct LpOptions {
    std::string program = "thm1";
    std::string sweep_ph;
    bool use_float = false;
    bool full_support = false;
};

int cmd_lp(const RunConfig& c, const LpOptions& o) {
    Program prog = parse_program(o.program);
    std::vector<double> phs = o.sweep_ph.empty() ? std::vector<double>{c.g.p_h} : parse_range("sweep-ph", o.sweep_ph);
    for (double ph : phs) {
        GameParams g = c.g;
        g.p_h = ph;
        g.validate(prog != Program::ThmOne);
    }
    Sink sink(c, "lp", "lp");
    auto& os = sink.out();
    os << "p_h,c1,cj,view,program,eps,value,closed_form,abs_diff\n";
    for (double ph : phs) {
        GameParams g = c.g;
        g.p_h = ph;
        g.validate(prog != Program::ThmOne);
        auto P = exact(g);
        auto B = basis(P);
        std::vector<Rational> closed;
        if (prog == Program::ThmOne) {
            auto v = g.view == View::NonConsequentialist ? v_star(P) : v_dagger(P);
            closed.assign(v.begin(), v.end());
        }
        for (std::size_t j = 0; j < g.n(); ++j) {
            Rational cf;
            if (prog == Program::ThmOne) {
                cf = closed[j];
            } else {
                if (g.costs[j] < 1.0) continue;
                auto eb = ethical_bounds<Rational>(P.p_h, P.costs.front(), P.costs[j]);
                cf = prog == Program::VbarEthical ? eb.vbar : eb.vunder;
            }
            for (double eps : c.eps_list) {
                ProgramSpec spec{prog, j, eps, o.full_support ? Support::Full : Support::Restricted};
                os << fmt(ph) << ',' << fmt(g.costs.front()) << ',' << fmt(g.costs[j]) << ',' << to_string(g.view) << ','
                   << to_string(prog) << ',' << fmt(eps) << ',';
                if (o.use_float) {
                    auto r = solve_program(approx(g), spec);
                    if (!r.feasible) {
                        os << "infeasible," << fmt(cf.get_d()) << ",\n";
                        continue;
                    }
                    os << fmt(r.value) << ',' << fmt(cf.get_d()) << ',' << fmt(std::abs(r.value - cf.get_d())) << '\n';
                } else {
                    auto r = solve_program(P, spec);
                    if (!r.feasible) {
                        os << "infeasible," << fmt(cf.get_d()) << ",\n";
                        continue;
                    }
                    Rational d = abs(Rational(r.value - cf));
                    os << fmt(r.value.get_d()) << ',' << fmt(cf.get_d()) << ',' << fmt(d.get_d()) << '\n';
                }
            }
        }
    }
    return kExitOk;
}

EquilibriumMachine make_machine(const RunConfig& c) {
    c.g.validate(false);
    return EquilibriumMachine(c.g, derive_constants(c.g, c.rho), true);
}

struct TraceRow {
    std::string stage, phase;
    std::array<double, 3> w;
};

// Trace CSV for the ethical constructions; describe(state) supplies stage, phase and weights.
template <class M, class Describe>
void write_staged_trace(std::ostream& os, const M& m, const PathEnsemble<typename M::State>& ens, Describe describe) {
    const std::size_t n = m.num_types();
    os << "path,type,t,stage,phase,w1,w2,w3,omega,message,action,payoff";
    for (std::size_t j = 1; j <= n; ++j) os << ",post_" << j;
    for (std::size_t j = 1; j <= n; ++j) os << ",lie_l_" << j;
    for (std::size_t j = 1; j <= n; ++j) os << ",lie_h_" << j;
    os << '\n';
    for (std::size_t p = 0; p < ens.traces.size(); ++p) {
        const auto& rec = ens.traces[p];
        for (std::size_t t = 0; t < rec.steps.size(); ++t) {
            const auto& st = rec.steps[t];
            TraceRow row = describe(st.state);
            Prescription pr = m.prescribe(st.state);
            os << p << ',' << rec.type + 1 << ',' << t << ',' << row.stage << ',' << row.phase << ',' << fmt(row.w[0])
               << ',' << fmt(row.w[1]) << ',' << fmt(row.w[2]) << ',' << (st.omega == Omega::h ? 'h' : 'l') << ','
               << (st.message == Message::h ? 'h' : 'l') << ','
               << (action_of(st.receiver, st.message) == Act::H ? 'H' : 'L') << ',' << fmt(st.payoff);
            for (std::size_t j = 0; j < n; ++j) os << ',' << fmt(st.state.post[j]);
            for (std::size_t j = 0; j < n; ++j) os << ',' << fmt(pr.lie_in_l[j]);
            for (std::size_t j = 0; j < n; ++j) os << ',' << fmt(pr.lie_in_h[j]);
            os << '\n';
        }
    }
}

SimConfig sim_config(const RunConfig& c, std::size_t paths) {
    SimConfig s;
    s.horizon = c.horizon;
    s.paths = paths;
    s.seed = c.seed;
    if (c.type) s.fixed_type = *c.type - 1;
    return s;
}

int cmd_construct(const RunConfig& c, bool ethical) {
    Sink sink(c, "construct", "construct");
    auto& os = sink.out();
    SimConfig sc = sim_config(c, 1);
    sc.keep_traces = true;
    if (ethical && c.rho_prime) {
        PunishmentMachine m(c.g, *c.rho_prime);
        const auto& k = m.constants();
        auto w = w_of_rho_prime(c.g, *c.rho_prime);
        os << "# delta_hat=" << fmt(k.delta_hat) << " rho_star=" << fmt(k.rho_star) << " lambda=" << fmt(k.lambda)
           << " zeta_star=" << fmt(k.zeta_star) << " p_star=" << fmt(k.p_star) << " k=" << join(std::vector<double>(k.k.begin(), k.k.end())) << " w=(" << join(w)
           << ")\n";
        auto ens = run(m, m.initial_state(), sc);
        write_staged_trace(os, m, ens, [](const PunishState& s) {
            return TraceRow{"Punish", to_string(s.phase), s.w};
        });
        return kExitOk;
    }
    if (ethical) {
        CompositeMachine m(c.g, c.rho);
        const auto& k = m.auxiliary().constants();
        os << "# rho_prime=" << fmt(m.rho_prime()) << " c_star=" << fmt(c.g.costs[m.cstar_index()])
           << " aux_lambda=" << fmt(k.lambda) << " aux_eta_star=" << fmt(k.eta_star)
           << " punish_zeta_star=" << fmt(m.punishment().constants().zeta_star) << '\n';
        auto ens = run(m, m.initial_state(), sc);
        write_staged_trace(os, m, ens, [](const CompositeState& s) {
            if (s.stage == Stage::Aux) return TraceRow{"Aux", to_string(s.aux.phase), s.aux.w};
            if (s.stage == Stage::Punish) return TraceRow{"Punish", to_string(s.pun.phase), s.pun.w};
            return TraceRow{to_string(s.stage), "-", {s.r, 0.0, 1.0 - s.r}};
        });
        return kExitOk;
    }
    EquilibriumMachine m = make_machine(c);
    const auto& k = m.constants();
    auto w0 = m.preset_weights(parse_preset(c.preset));
    os << "# delta_hat=" << fmt(k.delta_hat) << " rho_star=" << fmt(k.rho_star) << " n_over_l=" << k.n_num << '/'
       << k.l_den << " rho_tilde=" << fmt(k.rho_tilde) << " rho_hat=" << fmt(k.rho_hat) << " lambda=" << fmt(k.lambda)
       << " eta_star=" << fmt(k.eta_star) << " K=" << k.K << " M_hat=" << k.M_hat << " M=" << k.M
       << " p_star=" << fmt(k.p_star) << " w0=(" << fmt(w0[0]) << ',' << fmt(w0[1]) << ',' << fmt(w0[2]) << ")\n";
    auto ens = run(m, m.initial_state(w0), sc);
    write_trace_csv(os, ens, m);
    return kExitOk;
}

int cmd_simulate(const RunConfig& c, const std::string& trace_flag) {
    EquilibriumMachine m = make_machine(c);
    auto init = m.initial_state(parse_preset(c.preset));
    TypeArray target = m.value(init);
    auto tpath = trace_path(c, trace_flag, "simulate_trace");
    SimConfig sc = sim_config(c, c.num_paths);
    sc.keep_traces = tpath.has_value();
    auto ens = run(m, init, sc);
    Sink sink(c, "simulate", "simulate");
    auto& os = sink.out();
    os << "# tail_bound=" << fmt(ens.tail_bound) << " h_frequency="
       << fmt(static_cast<double>(ens.h_count) / static_cast<double>(std::max<std::size_t>(ens.periods, 1))) << '\n';
    os << "type,mean,stderr,target,z_score,paths\n";
    for (std::size_t j = 0; j < m.num_types(); ++j) {
        const auto& s = ens.per_type[j];
        if (s.count == 0) continue;
        double se = s.stderr_();
        double z = se > 0.0 ? (s.mean - target[j]) / se : 0.0;
        os << j + 1 << ',' << fmt(s.mean) << ',' << fmt(se) << ',' << fmt(target[j]) << ',' << fmt(z) << ','
           << s.count << '\n';
    }
    if (tpath) {
        Sink ts(*tpath, c, "simulate");
        write_trace_csv(ts.out(), ens, m);
    }
    return kExitOk;
}

void write_report(std::ostream& os, const VerificationReport& rep) {
    os << "check,status,worst,tolerance,path,t,evaluations,failures,state\n";
    for (const auto& ch : rep.checks) {
        std::string where = ch.where;
        for (char& x : where)
            if (x == ',') x = ';';
        os << ch.name << ',' << (ch.asserted ? (ch.pass() ? "pass" : "fail") : "info") << ',' << fmt(ch.worst) << ','
           << fmt(ch.tolerance) << ',' << ch.path << ',' << ch.t << ',' << ch.count << ',' << ch.failures << ','
           << where << '\n';
    }
    for (const auto& [k, v] : rep.metrics) os << k << ",info," << fmt(v) << ",,,,,,\n";
}

int cmd_verify(const RunConfig& c, const std::string& trace_in) {
    EquilibriumMachine m = make_machine(c);
    VerificationReport rep;
    if (!trace_in.empty()) {
        std::ifstream in(trace_in);
        if (!in) throw ValidationError("trace: cannot open '" + trace_in + "'");
        rep = verify_trace(read_trace_csv(in, m), m);
    } else {
        EqTraceObserver obs(m, c.horizon);
        run(m, m.initial_state(parse_preset(c.preset)), sim_config(c, c.num_paths), obs);
        rep = obs.report();
    }
    Sink sink(c, "verify", "verify");
    write_report(sink.out(), rep);
    std::cerr << (rep.all_pass() ? "verify: all asserted checks pass\n" : "verify: asserted checks failed\n");
    return rep.all_pass() ? kExitOk : kExitVerifyFailed;
}

int cmd_ethical(const RunConfig& c) {
    c.g.validate(true);
    std::vector<std::size_t> eth;
    for (std::size_t j = 0; j < c.g.n(); ++j)
        if (c.g.costs[j] >= 1.0) eth.push_back(j);
    if (eth.empty()) throw ValidationError("costs: no ethical type (cost >= 1)");
    Attainability at = commitment_attainable(c.g);
    Sink sink(c, "ethical", "ethical");
    auto& os = sink.out();
    os << "# commitment_attainable=" << (at.attainable ? "true" : "false") << " reason=" << at.reason << '\n';
    os << "p_h,c1,c,vbar,vbar_lp,vunder,vunder_lp,c1_times_c_minus_1\n";
    auto P = exact(c.g);
    for (std::size_t j : eth) {
        auto eb = ethical_bounds<Rational>(P.p_h, P.costs.front(), P.costs[j]);
        auto lp = [&](Program prog) {
            auto r = solve_program(P, ProgramSpec{prog, j, 0.0, Support::Restricted});
            return r.feasible ? fmt(r.value.get_d()) : std::string("infeasible");
        };
        os << fmt(c.g.p_h) << ',' << fmt(c.g.costs.front()) << ',' << fmt(c.g.costs[j]) << ',' << fmt(eb.vbar.get_d())
           << ',' << lp(Program::VbarEthical) << ',' << fmt(eb.vunder.get_d()) << ',' << lp(Program::VunderEthical)
           << ',' << fmt(c.g.costs.front() * (c.g.costs[j] - 1.0)) << '\n';
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, const std::string& over, const std::string& grid) {
    if (over != "rho" && over != "delta" && over != "p_h") throw ValidationError("over: expected rho|delta|p_h");
    if (grid.empty()) throw ValidationError("grid: required (a:b:step)");
    auto values = parse_range("grid", grid);
    Sink sink(c, "sweep", "sweep");
    auto& os = sink.out();
    os << over << ",type,mean,stderr,target,z_score,growth_factor\n";
    for (double x : values) {
        RunConfig rc = c;
        apply(rc, over, fmt(x));
        EquilibriumMachine m = make_machine(rc);
        auto init = m.initial_state(parse_preset(rc.preset));
        TypeArray target = m.value(init);
        auto ens = run(m, init, sim_config(rc, rc.num_paths));
        const auto& k = m.constants();
        double gf = growth_factor(k.lambda, k.rho_star, k.rho);
        for (std::size_t j = 0; j < m.num_types(); ++j) {
            const auto& s = ens.per_type[j];
            if (s.count == 0) continue;
            double se = s.stderr_();
            os << fmt(x) << ',' << j + 1 << ',' << fmt(s.mean) << ',' << fmt(se) << ',' << fmt(target[j]) << ','
               << fmt(se > 0.0 ? (s.mean - target[j]) / se : 0.0) << ',' << fmt(gf) << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reputation and lying-cost communication games: bounds, LPs, equilibrium construction, simulation"};
    app.set_version_flag("--version", REPCOMM_VERSION);
    app.require_subcommand(1);

    std::map<std::string, Flags> flags;
    auto sub = [&](const char* name, const char* desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        flags[name].add(s);
        return s;
    };

    sub("bounds", "closed-form payoff bounds v*, v**, v-dagger");
    LpOptions lpo;
    CLI::App* lp = sub("lp", "occupation-measure programs against their closed forms");
    lp->add_option("--program", lpo.program, "thm1 | vbar | vunder");
    lp->add_option("--sweep-ph", lpo.sweep_ph, "a:b:step grid over p_h");
    lp->add_flag("--float", lpo.use_float, "double precision instead of exact rationals");
    lp->add_flag("--full-support", lpo.full_support, "all 16 pure profiles (diagnostic)");
    bool ethical = false;
    CLI::App* con = sub("construct", "build the equilibrium machine and dump one state trace");
    con->add_flag("--ethical", ethical, "composite construction with ethical types");
    std::string sim_trace;
    CLI::App* sim = sub("simulate", "Monte Carlo payoffs against the promised values");
    sim->add_option("--trace-out", sim_trace, "per-path trace CSV");
    std::string trace_in;
    CLI::App* ver = sub("verify", "check equilibrium conditions on a trace CSV or an inline run");
    ver->add_option("--trace", trace_in, "trace CSV written by simulate or construct");
    sub("ethical", "ethical-type bounds and commitment attainability");
    std::string over = "rho", grid;
    CLI::App* sw = sub("sweep", "simulate over a parameter grid");
    sw->add_option("--over", over, "rho | delta | p_h");
    sw->add_option("--grid", grid, "a:b:step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        for (CLI::App* s : app.get_subcommands()) {
            const std::string name = s->get_name();
            RunConfig c = flags.at(name).resolve();
            if (name == "bounds") return cmd_bounds(c);
            if (name == "lp") return cmd_lp(c, lpo);
            if (name == "construct") return cmd_construct(c, ethical);
            if (name == "simulate") return cmd_simulate(c, sim_trace);
            if (name == "verify") return cmd_verify(c, trace_in);
            if (name == "ethical") return cmd_ethical(c);
            if (name == "sweep") return cmd_sweep(c, over, grid);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const NonBayesian& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}
