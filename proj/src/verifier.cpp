#include "repcomm/verifier.hpp"

#include <cstdio>
#include <functional>
#include <unordered_map>

namespace repcomm {

std::string VerificationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.asserted ? (c.pass() ? "PASS " : "FAIL ") : "INFO ") << c.name << " worst=" << c.worst
           << " tol=" << c.tolerance << " evals=" << c.count << " failures=" << c.failures;
        if (c.count) os << " at (path " << c.path << ", t " << c.t << ")";
        if (!c.where.empty()) os << " state " << c.where;
        os << '\n';
    }
    for (const auto& [k, v] : metrics) os << "metric " << k << " = " << v << '\n';
    return os.str();
}

std::string describe(const EqState& s) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "{phase=%s, w=(%.12g, %.12g, %.12g), eta=%.12g, low=%d, counter=%d}",
                  to_string(s.phase).c_str(), s.w[0], s.w[1], s.w[2], s.eta(), s.low, s.counter);
    return buf;
}

double continuation(const std::vector<double>& u, std::size_t from, double delta) {
    double acc = 0.0;
    for (std::size_t t = u.size(); t-- > from;) acc = (1.0 - delta) * u[t] + delta * acc;
    return acc;
}

EqTraceObserver::EqTraceObserver(const EquilibriumMachine& m, std::size_t horizon, bool check_states)
    : mach_(m), horizon_(horizon), check_states_(check_states), absorbed_at(horizon, 0), decile_(10) {
    eta_.tolerance = 1e-12;
    u_.reserve(horizon);
}

void EqTraceObserver::begin_path(std::size_t, std::size_t type) {
    type_ = type;
    prev_l_ = false;
    spell_l_ = class2_l_ = 0;
    neg_ = false;
    in_run_ = false;
    u_.clear();
}

namespace {
void note(Check& c, double r, std::size_t path, std::size_t t, const EqState& s) {
    std::size_t before = c.count;
    double worst = c.worst;
    c.record(r, path, t);
    if (before == 0 || r > worst) c.where = describe(s);
}
}  // namespace

void EqTraceObserver::on_step(std::size_t path, std::size_t t, const EqState& s, const Prescription&, Omega om,
                              Message m, SenderAction, double u, const EqState&) {
    u_.push_back(u);
    const DerivedConstants& k = mach_.constants();
    if (check_states_) {
        StateResiduals r = state_residuals(mach_, s);
        note(br_, r.receiver_br, path, t, s);
        note(inc_, r.incentive, path, t, s);
        note(pk_, r.promise, path, t, s);
        note(mart_, r.martingale, path, t, s);
        if (mach_.active_learning(s)) note(eta_, k.eta_star - s.eta(), path, t, s);
        if (mach_.polytope_checked()) note(poly_, mach_.polytope_violation(s), path, t, s);
    }
    for (double x : s.w)
        if (x < -1e-12) neg_ = true;

    if (s.phase == Phase::Rebounding) {
        if (om == Omega::l) spell_l_ += 1;
        max_rebound_l = std::max(max_rebound_l, spell_l_);
    } else {
        spell_l_ = 0;
    }
    if (s.phase == Phase::Class2 && prev_l_) {
        ++class2_l_;
        max_class2_after_l = std::max(max_class2_after_l, class2_l_);
    }
    prev_l_ = om == Omega::l;
    if (s.phase == Phase::Absorbing) ++absorbed_at[t];

    // Reduced-outcome frequencies along a Class-1 run.
    if (s.phase == Phase::Class1) {
        if (!in_run_) {
            in_run_ = true;
            run_L_ = run_H_ = 0.0;
            run_w_ = 1.0;
        }
        if (om == Omega::l) {
            double dh = k.delta_hat;
            (m == Message::l ? run_L_ : run_H_) += (1.0 - dh) * run_w_;
            run_w_ *= dh;
            double excess = run_L_ - run_H_ * (1.0 - k.rho_tilde) / k.rho_tilde;
            double T = 0.0;
            if (excess >= 1.0) T = std::numeric_limits<double>::infinity();
            else if (excess > 0.0) T = std::ceil(std::log(1.0 - excess) / std::log(dh));
            max_T_ = std::max(max_T_, T);
            window_.record(T, path, t);
        }
    } else {
        in_run_ = false;
    }
}

void EqTraceObserver::end_path(std::size_t, std::size_t type, double) {
    ++paths;
    if (neg_) ++negative_weight_paths;
    if (type == 0) {
        for (std::size_t d = 0; d < 10; ++d) decile_[d].add(continuation(u_, d * horizon_ / 10, mach_.params().delta));
    }
}

VerificationReport EqTraceObserver::report() const {
    VerificationReport rep;
    if (check_states_) {
        rep.checks = {br_, inc_, pk_, mart_, eta_};
        if (mach_.polytope_checked()) rep.checks.push_back(poly_);
    }
    Check window = window_;
    window.worst = max_T_;
    rep.checks.push_back(window);
    rep.metrics["learning_window_T"] = max_T_;

    Check cont = type1_cont_;
    double ph = mach_.params().p_h;
    for (std::size_t d = 0; d < decile_.size(); ++d) {
        if (decile_[d].count == 0) continue;
        double excess = decile_[d].mean - (ph + 3.0 * decile_[d].stderr_());
        cont.record(excess, 0, d * horizon_ / 10);
        rep.metrics["type1_continuation_t" + std::to_string(d * horizon_ / 10)] = decile_[d].mean;
    }
    if (cont.count) rep.checks.push_back(cont);

    const DerivedConstants& k = mach_.constants();
    Check reb{"rebound_spell_le_K", true, static_cast<double>(k.K)};
    reb.count = paths;
    reb.worst = static_cast<double>(max_rebound_l);
    reb.failures = max_rebound_l > static_cast<std::size_t>(k.K);
    rep.checks.push_back(reb);
    Check c2{"class2_after_l_le_M", true, static_cast<double>(k.M)};
    c2.count = paths;
    c2.worst = static_cast<double>(max_class2_after_l);
    c2.failures = max_class2_after_l > static_cast<std::size_t>(k.M);
    rep.checks.push_back(c2);
    Check ab{"absorption_monotone", true, 0.0};
    for (std::size_t t = 1; t < absorbed_at.size(); ++t) {
        double drop = static_cast<double>(absorbed_at[t - 1]) - static_cast<double>(absorbed_at[t]);
        ab.record(drop / std::max<std::size_t>(paths, 1), 0, t);
    }
    rep.checks.push_back(ab);
    if (!absorbed_at.empty() && paths)
        rep.metrics["absorbed_fraction_final"] = static_cast<double>(absorbed_at.back()) / static_cast<double>(paths);
    rep.metrics["negative_weight_path_fraction"] =
        paths ? static_cast<double>(negative_weight_paths) / static_cast<double>(paths) : 0.0;
    return rep;
}

double bernoulli_kl(double p, double q) {
    auto term = [](double a, double b) {
        if (a <= 0.0) return 0.0;
        if (b <= 0.0) return std::numeric_limits<double>::infinity();
        return a * std::log(a / b);
    };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

void KLObserver::on_step(std::size_t, std::size_t t, const EqState& s, const Prescription& p, Omega, Message,
                         SenderAction, double, const EqState&) {
    if (mach_.active_learning(s)) {
        std::size_t n = mach_.num_types();
        double agg_l = 0.0, agg_h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            agg_l += s.post[j] * p.lie_in_l[j];
            agg_h += s.post[j] * p.lie_in_h[j];
        }
        double ph = mach_.params().p_h;
        cum_ += (1.0 - ph) * bernoulli_kl(p.lie_in_l[type_], agg_l) + ph * bernoulli_kl(p.lie_in_h[type_], agg_h);
    }
    if (t + 1 == horizon_ / 2) half_.add(cum_);
}

MixingReport detect_always_mixing(const EquilibriumMachine& m, std::size_t horizon, double eps, std::size_t cap) {
    const std::size_t n = m.num_types();
    const double rs = m.constants().rho_star;
    MixingReport rep;
    rep.pure_somewhere.assign(n, false);
    rep.always_eps_close.assign(n, true);

    auto key = [](const EqState& s) {
        auto r = [](double x) { return static_cast<long long>(std::llround(x * 1e10)); };
        std::string k;
        k.reserve(128);
        k += std::to_string(static_cast<int>(s.phase)) + ':' + std::to_string(s.low) + ':' + std::to_string(s.counter);
        for (double x : s.w) k += ':' + std::to_string(r(x));
        for (double x : s.post) k += ':' + std::to_string(r(x));
        return k;
    };
    auto done = [&] {
        for (std::size_t j = 0; j < n; ++j)
            if (!rep.pure_somewhere[j] || rep.always_eps_close[j]) return false;
        return true;
    };
    std::unordered_map<std::string, std::size_t> seen;  // smallest depth reached
    const std::pair<Omega, Message> order[] = {
        {Omega::l, Message::h}, {Omega::l, Message::l}, {Omega::h, Message::h}, {Omega::h, Message::l}};

    std::function<void(const EqState&, std::size_t)> visit = [&](const EqState& s, std::size_t depth) {
        if (depth >= horizon || done()) return;
        std::string kk = key(s);
        auto it = seen.find(kk);
        if (it != seen.end() && it->second <= depth) return;
        if (it == seen.end() && seen.size() >= cap) throw StateExplosion("reachable state count exceeds cap");
        seen[kk] = depth;
        Prescription p = m.prescribe(s);
        for (std::size_t j = 0; j < n; ++j) {
            if (s.post[j] <= 0.0) continue;
            auto pure = [](double x) { return x == 0.0 || x == 1.0; };
            if (pure(p.lie_in_l[j]) && pure(p.lie_in_h[j])) rep.pure_somewhere[j] = true;
            if (std::abs(p.lie_in_l[j] - rs) > eps || p.lie_in_h[j] > eps) rep.always_eps_close[j] = false;
        }
        for (auto [om, msg] : order) {
            double agg = 0.0;
            for (std::size_t j = 0; j < n; ++j) agg += s.post[j] * p.p_message(j, om, msg);
            if (agg <= 0.0) continue;
            visit(m.step(s, om, msg), depth + 1);
        }
    };
    visit(m.initial_state(), 0);
    rep.states = seen.size();
    return rep;
}

SustainabilityReport sustainability(const DerivedConstants& k, std::size_t periods) {
    SustainabilityReport r;
    r.rho_above = std::min(1.0, k.rho_star + 0.05);
    r.factor_at_rho = growth_factor(k.lambda, k.rho_star, k.rho);
    r.factor_above = growth_factor(k.lambda, k.rho_star, r.rho_above);
    r.analytic_ok = r.factor_at_rho > 1.0 && r.factor_above < 1.0;

    // Evenly spread (l,h) outcomes at frequency rho; mean log gap ratio until the first cap.
    auto trend = [&](double rho, double eta0) {
        double eta = eta0, sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < periods; ++i) {
            bool lh = std::floor((i + 1) * rho) > std::floor(i * rho);
            auto [e_lh, e_ll] = belief_update_class1(k, eta);
            double next = lh ? e_lh : e_ll;
            double raw = k.eta_star + (1.0 + k.lambda * k.rho_star) * (eta - k.eta_star);
            if (!lh && raw >= 1.0) break;
            sum += std::log((next - k.eta_star) / (eta - k.eta_star));
            ++cnt;
            eta = next;
        }
        return cnt ? sum / static_cast<double>(cnt) : 0.0;
    };
    double eta0 = k.eta_star + 0.5 * (1.0 - k.eta_star);
    r.trend_at_rho = trend(k.rho, eta0);
    r.trend_above = trend(r.rho_above, eta0);
    r.trace_ok = r.trend_at_rho >= 0.0 && r.trend_above < 0.0;
    return r;
}

}  // namespace repcomm
