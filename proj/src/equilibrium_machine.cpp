#include "repcomm/equilibrium_machine.hpp"

#include <algorithm>
#include <cmath>

namespace repcomm {

namespace {
constexpr double kSnap = 1e-12;

long ceil_q(const Rational& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r.get_si();
}
}  // namespace

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Class1: return "Class1";
        case Phase::Class2: return "Class2";
        case Phase::Rebounding: return "Rebounding";
        case Phase::Absorbing: return "Absorbing";
    }
    return "?";
}

Preset parse_preset(const std::string& s) {
    if (s == "target") return Preset::Target;
    if (s == "printed") return Preset::Printed;
    throw ValidationError("preset: expected target|printed, got '" + s + "'");
}

std::pair<long, long> choose_n_over_l(const Rational& rho, const Rational& rho_star) {
    for (long l = 1; l < 10000000; ++l) {
        long n = ceil_q(rho_star * l) - 1;
        if (n < 1) continue;
        if (Rational(n, l + 1) > rho) return {n, l};
    }
    throw ValidationError("no rational n/l found in (rho, rho*)");
}

double growth_factor(double lambda, double rho_star, double rho) {
    return std::pow(1.0 + lambda * rho_star, 1.0 - rho) * std::pow(1.0 - lambda * (1.0 - rho_star), rho);
}

DerivedConstants derive_constants(const GameParams& g, double rho) {
    g.validate(true);
    if (g.n() > kMaxTypes) throw ValidationError("too many types");
    DerivedConstants k;
    Rational ph = to_rational(g.p_h), dq = to_rational(g.delta), rq = to_rational(rho);
    k.rho_star_q = ph / (1 - ph);
    if (rq < 0 || rq >= k.rho_star_q) throw ValidationError("rho must lie in [0, rho*)");
    k.delta = g.delta;
    k.delta_hat_q = dq * (1 - ph) / (1 - dq * ph);
    k.delta_hat = k.delta_hat_q.get_d();
    k.rho = rho;
    k.rho_star = k.rho_star_q.get_d();

    auto [n, l] = choose_n_over_l(rq, k.rho_star_q);
    k.n_num = n;
    k.l_den = l;
    Rational nl(n, l), nl1(n, l + 1);
    k.rho_tilde = Rational((nl + nl1) / 2).get_d();
    k.rho_hat = Rational((nl + k.rho_star_q) / 2).get_d();

    const double rs = k.rho_star, rh = k.rho_hat;
    auto f = [&](double lam) { return (1.0 - rh) * std::log1p(lam * rs) + rh * std::log1p(-lam * (1.0 - rs)); };
    double lo = 1e-9, hi = (1.0 / (1.0 - rs)) * (1.0 - 1e-12);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    double cap = (1.0 - std::sqrt(1.0 - rs)) / (1.0 - rs);
    k.lambda_root = std::min(lo, cap);
    k.lambda = 0.9 * k.lambda_root;

    std::vector<Rational> pi;
    for (double p : g.prior) pi.push_back(to_rational(p));
    const std::size_t nt = g.n();
    k.k.assign(nt, 0);
    Rational factor = 1 - (1 - k.rho_star_q) * pi[0];
    Rational m_min = 1;
    bool have_m = false;
    for (std::size_t j = 2; j < nt; ++j) {
        Rational s = 0;
        for (std::size_t i = 1; i < j; ++i) s += pi[i];
        long kk = 1;
        while (true) {
            Rational share = pi[j] / kk;
            if (factor * share / (s + share) <= k.rho_star_q) break;
            ++kk;
        }
        k.k[j] = kk;
        Rational m = (pi[j] / kk) / (s + pi[j]);
        if (!have_m || m < m_min) m_min = m;
        have_m = true;
    }
    double eta_lo = Rational((1 - k.rho_star_q) * pi[0]).get_d();
    k.eta_star = eta_lo;
    if (have_m) {
        Rational e = pi[0] * (1 - m_min) / (1 - m_min * pi[0]);
        k.eta_star = std::max(eta_lo, e.get_d());
    }

    Rational c1 = to_rational(g.costs.front());
    k.K = ceil_q((ph + (1 - c1) * ph) / (c1 * (1 - ph) * (1 - ph)));
    k.M_hat = static_cast<long>(std::ceil(std::log(1.0 / g.prior[0]) / std::log(std::sqrt(1.0 / (1.0 - rs))))) + 1;
    k.M = k.M_hat;
    for (long x : k.k) k.M += x;

    Basis b = profile_vectors(g);
    k.p_star = -b.vN[0] / (b.vH[0] - b.vN[0]);
    return k;
}

std::pair<double, double> belief_update_class1(const DerivedConstants& k, double eta) {
    double d = eta - k.eta_star;
    double lh = k.eta_star + (1.0 - k.lambda * (1.0 - k.rho_star)) * d;
    double ll = k.eta_star + std::min(1.0 - k.eta_star, (1.0 + k.lambda * k.rho_star) * d);
    return {lh, ll};
}

Mixing mixing_from_posteriors(double eta, double eta_lh, double eta_ll) {
    if (!(eta_lh < eta && eta < eta_ll)) throw NonBayesian("posteriors must satisfy eta_lh < eta < eta_ll");
    double Pl = (eta - eta_lh) / (eta_ll - eta_lh);
    double x1 = eta_ll * Pl / eta;
    double x2 = (1.0 - eta_ll) * Pl / (1.0 - eta);
    auto fix = [](double x) {
        if (x < -1e-12 || x > 1.0 + 1e-12) throw NonBayesian("mixing probability outside [0,1]");
        return std::clamp(x, 0.0, 1.0);
    };
    return {fix(x1), fix(x2)};
}

EquilibriumMachine::EquilibriumMachine(const GameParams& g, const DerivedConstants& k, bool check_polytope)
    : g_(g), k_(k), basis_(profile_vectors(g)), table_(g), check_polytope_(check_polytope) {
    g_.validate(!check_polytope);
}

EquilibriumMachine::EquilibriumMachine(const GameParams& g, double rho)
    : EquilibriumMachine(g, derive_constants(g, rho), true) {}

std::array<double, 3> EquilibriumMachine::preset_weights(Preset p) const {
    auto P = approx(g_);
    return p == Preset::Target ? target_weights(P, k_.rho) : printed_weights(P, k_.rho);
}

double EquilibriumMachine::value_of(const std::array<double, 3>& w, std::size_t j) const {
    return w[0] * basis_.vH[j] + w[1] * basis_.vL[j] + w[2] * basis_.vN[j];
}

TypeArray EquilibriumMachine::value(const State& s) const {
    TypeArray v{};
    for (std::size_t j = 0; j < g_.n(); ++j) v[j] = value_of(s.w, j);
    return v;
}

int EquilibriumMachine::top_type(const State& s) const {
    for (std::size_t j = 0; j < g_.n(); ++j)
        if (s.post[j] > 0.0) return static_cast<int>(j);
    return 0;
}

double EquilibriumMachine::polytope_violation(const State& s) const {
    int top = top_type(s);
    double v = value_of(s.w, top);
    double viol = std::max({-s.w[0], -s.w[1], -s.w[2], -v, v - basis_.vH[top],
                            s.w[1] * (1.0 - k_.rho_star) - k_.rho_star * s.w[0]});
    return std::max(viol, 0.0);
}

double EquilibriumMachine::top_value_after_lie(const std::array<double, 3>& w) const {
    double dh = k_.delta_hat;
    return ((w[1] - (1.0 - dh)) * basis_.vL[0] + w[0] * basis_.vH[0] + w[2] * basis_.vN[0]) / dh;
}

Phase EquilibriumMachine::classify(const std::array<double, 3>& w) const {
    if (w[1] <= 0.0) return Phase::Absorbing;
    if (top_value_after_lie(w) < -kSnap) return Phase::Rebounding;
    return w[1] >= (1.0 - k_.delta_hat) - kSnap ? Phase::Class1 : Phase::Class2;
}

bool EquilibriumMachine::absorbing_honest(const State& s) const {
    return (s.w[0] - (1.0 - k_.delta)) / k_.delta >= (k_.p_star + 1.0) / 2.0 - kSnap;
}

EquilibriumMachine::State EquilibriumMachine::initial_state(const std::array<double, 3>& w) const {
    double sum = w[0] + w[1] + w[2];
    if (std::abs(sum - 1.0) > 1e-12 || *std::min_element(w.begin(), w.end()) < -1e-12)
        throw ValidationError("initial weights must lie in the simplex");
    State s;
    s.w = w;
    for (std::size_t j = 0; j < g_.n(); ++j) s.post[j] = g_.prior[j];
    s.low = static_cast<int>(g_.n()) - 1;
    s.counter = 0;
    s.phase = classify(w);
    if (check_polytope_ && polytope_violation(s) > 1e-12)
        throw ValidationError("initial weights lie outside the polytope V*");
    return s;
}

double EquilibriumMachine::class2_lie(const State& s) const {
    if (g_.n() == 1 || s.low == 0) return k_.rho_star;
    if (s.low == 1) return std::min(1.0, k_.rho_star / (1.0 - s.eta()));
    long left = k_.k[s.low] - s.counter;
    return left <= 1 ? 1.0 : 1.0 / static_cast<double>(left);
}

Prescription EquilibriumMachine::prescribe(const State& s) const {
    Prescription p;
    const std::size_t n = g_.n();
    switch (s.phase) {
        case Phase::Class1: {
            p.receiver = ReceiverAction::Trust;
            if (n == 1) {
                p.lie_in_l[0] = k_.rho_star;
                break;
            }
            auto [lh, ll] = belief_update_class1(k_, s.eta());
            Mixing x = (ll - lh > 1e-15) ? mixing_from_posteriors(s.eta(), lh, ll)
                                         : Mixing{1.0 - k_.rho_star, 1.0 - k_.rho_star};
            p.lie_in_l[0] = 1.0 - x.x1;
            for (std::size_t j = 1; j < n; ++j) p.lie_in_l[j] = 1.0 - x.x2;
            break;
        }
        case Phase::Class2:
            p.receiver = ReceiverAction::Trust;
            p.lie_in_l[s.low] = class2_lie(s);
            break;
        case Phase::Rebounding:
            p.receiver = ReceiverAction::NeverTrust;
            for (std::size_t j = 0; j < n; ++j) p.lie_in_l[j] = 1.0;
            break;
        case Phase::Absorbing:
            if (absorbing_honest(s)) {
                p.receiver = ReceiverAction::Trust;
            } else {
                p.receiver = ReceiverAction::NeverTrust;
                for (std::size_t j = 0; j < n; ++j) p.lie_in_l[j] = 1.0;
            }
            break;
    }
    return p;
}

std::array<double, 3> EquilibriumMachine::qmix(const std::array<double, 3>& target, std::size_t j) const {
    double t = value_of(target, j);
    double q = (t - basis_.vN[j]) / (basis_.vH[j] - basis_.vN[j]);
    return {q, 0.0, 1.0 - q};
}

EquilibriumMachine::State EquilibriumMachine::absorb(const State& s, const std::array<double, 3>& w) const {
    State out = s;
    out.w = w;
    out.w[1] = 0.0;
    out.phase = Phase::Absorbing;
    return out;
}

EquilibriumMachine::State EquilibriumMachine::step(const State& s, Omega om, Message m) const {
    const double dh = k_.delta_hat, d = k_.delta;
    const auto& w = s.w;
    const bool hh = om == Omega::h && m == Message::h;
    const bool hl = om == Omega::h && m == Message::l;
    const bool lh = om == Omega::l && m == Message::h;
    const std::size_t n = g_.n();

    auto next = [&](State t, std::array<double, 3> nw) {
        if (std::abs(nw[1]) < kSnap) nw[1] = 0.0;
        t.w = nw;
        t.phase = classify(nw);
        return t;
    };

    switch (s.phase) {
        case Phase::Class1: {
            if (hh) return s;
            if (hl) return absorb(s, vunder_weights());
            Prescription p = prescribe(s);
            State t = s;
            t.post = bayes(s.post, n, p, om, m);
            if (lh) return next(t, {w[0] / dh, (w[1] - (1.0 - dh)) / dh, w[2] / dh});
            std::array<double, 3> a8{(w[0] - (1.0 - dh)) / dh, w[1] / dh, w[2] / dh};
            if (n > 1 && t.post[0] >= 1.0 - 1e-15) {
                t.post = {};
                t.post[0] = 1.0;
                t.low = 0;
                return absorb(t, qmix(a8, 0));
            }
            return next(t, a8);
        }
        case Phase::Class2: {
            if (hh) return s;
            if (hl) return absorb(s, vunder_weights());
            Prescription p = prescribe(s);
            State t = s;
            t.post = bayes(s.post, n, p, om, m);
            if (lh) {
                std::array<double, 3> a7{w[0] / dh, (w[1] - (1.0 - dh)) / dh, w[2] / dh};
                return absorb(t, qmix(a7, s.low));
            }
            t.counter = s.counter + 1;
            if (t.post[s.low] <= 0.0) {
                int nl = s.low;
                while (nl > 0 && t.post[nl] <= 0.0) --nl;
                t.low = nl;
                t.counter = 0;
            }
            std::array<double, 3> a8{(w[0] - (1.0 - dh)) / dh, w[1] / dh, w[2] / dh};
            if (n > 1 && t.post[0] >= 1.0 - 1e-15) {
                t.post = {};
                t.post[0] = 1.0;
                t.low = 0;
                return absorb(t, qmix(a8, 0));
            }
            return next(t, a8);
        }
        case Phase::Rebounding: {
            if (om == Omega::h) return s;
            if (lh) return next(s, {w[0] / dh, w[1] / dh, (w[2] - (1.0 - dh)) / dh});
            return absorb(s, vunder_weights());
        }
        case Phase::Absorbing: {
            if (absorbing_honest(s)) {
                if (hh || (om == Omega::l && m == Message::l))
                    return absorb(s, {(w[0] - (1.0 - d)) / d, 0.0, w[2] / d});
                return absorb(s, vunder_weights());
            }
            if (m == Message::h) return absorb(s, {w[0] / d, 0.0, (w[2] - (1.0 - d)) / d});
            return absorb(s, vunder_weights());
        }
    }
    return s;
}

}  // namespace repcomm
