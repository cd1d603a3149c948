#include "repcomm/punishment_machine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace repcomm {

namespace {
constexpr double kSnap = 1e-12;
constexpr double kRuledOut = 1e-12;
}  // namespace

std::string to_string(PunishPhase p) {
    switch (p) {
        case PunishPhase::Class1: return "Class1";
        case PunishPhase::Class2: return "Class2";
        case PunishPhase::Class3: return "Class3";
    }
    return "?";
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::Aux: return "Aux";
        case Stage::Signal: return "Signal";
        case Stage::Alternate: return "Alternate";
        case Stage::Punish: return "Punish";
    }
    return "?";
}

long class2_k(const std::vector<double>& pi, std::size_t j, double rho_star) {
    Rational rest = 0;
    for (std::size_t i = j + 1; i < pi.size(); ++i) rest += to_rational(pi[i]);
    Rational pj = to_rational(pi[j]), bound = 1 - to_rational(rho_star);
    for (long k = 1;; ++k) {
        Rational share = pj / k;
        if (share / (share + rest) <= bound) return k;
        if (k > 1000000) throw ValidationError("class-2 count does not converge");
    }
}

PunishmentMachine::PunishmentMachine(const GameParams& g, double rho_prime, const TypeArray& post0, double lambda)
    : g_(g), table_(g), post0_(post0) {
    g_.validate(true);
    if (g_.n() > kMaxTypes) throw ValidationError("too many types");
    const std::size_t n = g_.n();
    auto P = approx(g_);
    auto B = basis(P);
    vH_ = B.vH;
    vN_ = B.vN;
    punish_weights(P, rho_prime);  // range check

    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (post0_[j] < 0.0) throw ValidationError("belief entries must be nonnegative");
        mass += post0_[j];
    }
    if (std::abs(mass - 1.0) > 1e-12) throw ValidationError("belief must sum to 1");

    k_.delta = g_.delta;
    k_.delta_hat = g_.delta * (1.0 - g_.p_h) / (1.0 - g_.delta * g_.p_h);
    k_.rho_star = g_.rho_star();
    k_.rho_prime = rho_prime;
    k_.lambda = lambda > 0.0 ? lambda : 0.9 * (1.0 - std::sqrt(1.0 - k_.rho_star)) / (1.0 - k_.rho_star);
    k_.p_star = -vN_[0] / (vH_[0] - vN_[0]);
    k_.k.assign(n, 0);

    std::vector<int> sup;
    for (std::size_t j = 0; j < n; ++j)
        if (post0_[j] > 0.0) sup.push_back(static_cast<int>(j));
    k_.last = sup.back();

    // Support-relative masses; the k's and the reputation floor use them.
    std::vector<double> pi;
    for (int j : sup) pi.push_back(post0_[j]);
    const std::size_t m = pi.size();
    const double pin = pi.back(), rs = k_.rho_star;
    double zmin = rs * pin;
    for (std::size_t a = 0; a + 2 < m; ++a) {
        long kk = class2_k(pi, a, rs);
        double R = 0.0;
        for (std::size_t b = a + 1; b + 1 < m; ++b) R += pi[b];
        // Floor on zeta keeping the class-2 honesty share at most 1 - rho* once the
        // other masses are rescaled by (1 - zeta)/(1 - pi_n).
        for (;; ++kk) {
            double scale = 1.0 / (1.0 - pin);
            double A = rs * pi[a] * scale / static_cast<double>(kk) - (1.0 - rs) * scale * R;
            double z = A > 0.0 ? A / (A + 1.0 - rs) : 0.0;
            if (z < pin) {
                zmin = std::max(zmin, z);
                break;
            }
        }
        k_.k[sup[a]] = kk;
    }
    k_.zeta_star = zmin;
}

namespace {
TypeArray prior_array(const GameParams& g) {
    TypeArray p{};
    for (std::size_t j = 0; j < g.n(); ++j) p[j] = g.prior[j];
    return p;
}
}  // namespace

PunishmentMachine::PunishmentMachine(const GameParams& g, double rho_prime)
    : PunishmentMachine(g, rho_prime, prior_array(g)) {}

double PunishmentMachine::value_of(const std::array<double, 3>& w, std::size_t j) const {
    return w[0] * vH_[j] + w[2] * vN_[j];
}

TypeArray PunishmentMachine::value(const State& s) const {
    TypeArray v{};
    for (std::size_t j = 0; j < g_.n(); ++j) v[j] = value_of(s.w, j);
    return v;
}

PunishPhase PunishmentMachine::classify(const std::array<double, 3>& w) const {
    if (w[1] >= (1.0 - k_.delta_hat) - kSnap) return PunishPhase::Class1;
    return w[1] > kSnap ? PunishPhase::Class2 : PunishPhase::Class3;
}

int PunishmentMachine::next_top(const TypeArray& post, int from) const {
    for (int j = from; j <= k_.last; ++j)
        if (post[j] > 0.0) return j;
    return k_.last;
}

PunishmentMachine::State PunishmentMachine::initial_state() const {
    auto P = approx(g_);
    State s;
    s.w = punish_weights(P, k_.rho_prime);
    s.post = post0_;
    s.top = next_top(s.post, 0);
    s.phase = classify(s.w);
    if (s.phase == PunishPhase::Class3) s.w[1] = 0.0;
    return s;
}

PunishmentMachine::State PunishmentMachine::absorbing_state(const std::array<double, 3>& w, const TypeArray& post) const {
    State s;
    s.post = post;
    s.top = next_top(post, 0);
    return to_class3(s, w);
}

bool PunishmentMachine::honest_regime(const State& s) const {
    return (s.w[0] - (1.0 - k_.delta)) / k_.delta >= (k_.p_star + 1.0) / 2.0 - kSnap;
}

double PunishmentMachine::top_honesty(const State& s) const {
    const double rs = k_.rho_star;
    if (s.top == k_.last) return 1.0 - rs;
    if (next_top(s.post, s.top + 1) == k_.last) return std::min(1.0, (1.0 - rs) / (1.0 - zeta(s)));
    long left = k_.k[s.top] - s.counter;
    return left <= 1 ? 1.0 : 1.0 / static_cast<double>(left);
}

Prescription PunishmentMachine::prescribe(const State& s) const {
    Prescription p;
    const std::size_t n = g_.n();
    switch (s.phase) {
        case PunishPhase::Class1: {
            p.receiver = ReceiverAction::NeverTrust;
            double z = zeta(s);
            double y_last, y_other;
            if (z >= 1.0 - 1e-15) {
                y_last = y_other = k_.rho_star;
            } else {
                double d = z - k_.zeta_star;
                double up = k_.zeta_star + std::min((1.0 + k_.lambda * (1.0 - k_.rho_star)) * d, 1.0 - k_.zeta_star);
                double down = k_.zeta_star + (1.0 - k_.lambda * k_.rho_star) * d;
                // Lying (a^L) raises zeta: the lower posterior follows honesty.
                Mixing x = mixing_from_posteriors(z, down, up);
                y_last = x.x1;
                y_other = x.x2;
            }
            for (std::size_t j = 0; j < n; ++j) p.lie_in_l[j] = static_cast<int>(j) == k_.last ? y_last : y_other;
            break;
        }
        case PunishPhase::Class2:
            p.receiver = ReceiverAction::NeverTrust;
            for (std::size_t j = 0; j < n; ++j) p.lie_in_l[j] = 1.0;
            p.lie_in_l[s.top] = 1.0 - top_honesty(s);
            break;
        case PunishPhase::Class3:
            if (honest_regime(s)) {
                p.receiver = ReceiverAction::Trust;
            } else {
                p.receiver = ReceiverAction::NeverTrust;
                for (std::size_t j = 0; j < n; ++j) p.lie_in_l[j] = 1.0;
            }
            break;
    }
    return p;
}

std::array<double, 3> PunishmentMachine::qmix(const std::array<double, 3>& target, std::size_t j) const {
    double t = value_of(target, j);
    double q = (t - vN_[j]) / (vH_[j] - vN_[j]);
    return {q, 0.0, 1.0 - q};
}

PunishmentMachine::State PunishmentMachine::to_class3(State s, const std::array<double, 3>& w) const {
    s.w = w;
    s.w[1] = 0.0;
    s.phase = PunishPhase::Class3;
    return s;
}

PunishmentMachine::State PunishmentMachine::step(const State& s, Omega om, Message m) const {
    const double dh = k_.delta_hat, d = k_.delta;
    const auto& w = s.w;
    const std::size_t n = g_.n();
    const bool hl = om == Omega::h && m == Message::l;

    auto next = [&](State t, std::array<double, 3> nw) {
        if (std::abs(nw[1]) < kSnap) nw[1] = 0.0;
        t.w = nw;
        t.phase = classify(nw);
        if (t.phase == PunishPhase::Class3) t.w[1] = 0.0;
        return t;
    };
    auto single = [&](State t, int j) {
        t.post = {};
        t.post[j] = 1.0;
        t.top = j;
        return t;
    };
    const std::array<double, 3> lh_vec{w[0] / dh, w[1] / dh, (w[2] - (1.0 - dh)) / dh};
    const std::array<double, 3> ll_vec{w[0] / dh, (w[1] - (1.0 - dh)) / dh, w[2] / dh};

    switch (s.phase) {
        case PunishPhase::Class1:
        case PunishPhase::Class2: {
            if (om == Omega::h) return hl ? initial_state() : s;
            Prescription p = prescribe(s);
            State t = s;
            double pm = 0.0;
            t.post = bayes(s.post, n, p, om, m, &pm);
            if (pm <= 0.0) return initial_state();
            if (s.phase == PunishPhase::Class2) {
                if (m == Message::l) return to_class3(single(t, s.top), qmix(ll_vec, s.top));
                t.counter = s.counter + 1;
                if (t.post[s.top] < kRuledOut) {
                    t.post[s.top] = 0.0;
                    t.top = next_top(t.post, s.top + 1);
                    t.counter = 0;
                }
            }
            if (m == Message::h && t.post[k_.last] >= 1.0 - 1e-15)
                return to_class3(single(t, k_.last), qmix(lh_vec, k_.last));
            return next(t, m == Message::h ? lh_vec : ll_vec);
        }
        case PunishPhase::Class3: {
            if (honest_regime(s)) {
                if (m == static_cast<Message>(om)) return to_class3(s, {(w[0] - (1.0 - d)) / d, 0.0, w[2] / d});
                return initial_state();
            }
            if (m == Message::h) return to_class3(s, {w[0] / d, 0.0, (w[2] - (1.0 - d)) / d});
            return initial_state();
        }
    }
    return s;
}

std::optional<double> select_rho_prime(const GameParams& g, double rho) {
    Attainability at = commitment_attainable(g);
    if (!at.attainable) throw ValidationError("commitment payoff not attainable: " + at.reason);
    const double rs = g.rho_star();
    if (rho < 0.0 || rho >= rs) throw ValidationError("rho must lie in [0, rho*)");
    auto P = approx(g);
    auto B = basis(P);
    const double c1 = g.costs.front();
    for (int i = 1;; ++i) {
        double rp = std::min(1.0, rs + 1e-3 * i);
        auto w = w_of_rho_prime(P, rp);
        bool ok = true;
        for (std::size_t j = 0; j < g.n() && ok; ++j) {
            double v = rho * B.vL[j] + (1.0 - rho) * B.vH[j];
            ok = c1 * (g.costs[j] - 1.0) <= 2.0 ? w[j] < v : w[j] > v;
        }
        if (ok) return rp;
        if (rp >= 1.0) return std::nullopt;
    }
}

// Composite ----------------------------------------------------------------

GameParams CompositeMachine::auxiliary_params(const GameParams& g, std::size_t& istar) {
    g.validate(true);
    Attainability at = commitment_attainable(g);
    if (!at.attainable) throw ValidationError("commitment payoff not attainable: " + at.reason);
    GameParams a = g;
    a.costs.clear();
    a.prior.clear();
    istar = g.n();
    for (std::size_t j = 0; j < g.n(); ++j) {
        if (g.costs[j] == *at.witness) istar = j;
        if (g.costs[j] <= *at.witness) {
            a.costs.push_back(g.costs[j]);
            a.prior.push_back(g.prior[j]);
        }
    }
    double s = 0.0;
    for (double p : a.prior) s += p;
    for (double& p : a.prior) p /= s;
    return a;
}

namespace {
TypeArray signal_low_belief(const GameParams& g) {
    // Belief after message l at the signaling history: the types sending l, prior-weighted.
    TypeArray p{};
    double s = 0.0;
    const double c1 = g.costs.front();
    for (std::size_t j = 0; j < g.n(); ++j)
        if (c1 * (g.costs[j] - 1.0) > 2.0) s += (p[j] = g.prior[j]);
    if (s <= 0.0) {
        for (std::size_t j = 0; j < g.n(); ++j) p[j] = g.prior[j];
        return p;
    }
    for (std::size_t j = 0; j < g.n(); ++j) p[j] /= s;
    return p;
}

double require_rho_prime(const GameParams& g, double rho) {
    auto rp = select_rho_prime(g, rho);
    if (!rp) throw ValidationError("no rho' on the grid separates the types");
    return *rp;
}
}  // namespace

CompositeMachine::CompositeMachine(const GameParams& g, double rho)
    : g_(g),
      aux_([&] {
          GameParams a = auxiliary_params(g, istar_);
          if (a.n() < 2) throw ValidationError("composite needs at least one type with cost < 1");
          return EquilibriumMachine(a, derive_constants(a, rho), false);
      }()),
      rho_prime_(require_rho_prime(g, rho)),
      pun_(g, rho_prime_, signal_low_belief(g), aux_.constants().lambda),
      table_(g) {
    vN_ = profile_vectors(g_).vN;
}

bool CompositeMachine::sends_high_at_signal(std::size_t j) const {
    return g_.costs.front() * (g_.costs[j] - 1.0) <= 2.0;
}

double CompositeMachine::alternation_frequency(double v) const {
    const double d = g_.delta, ph = g_.p_h, cs = g_.costs[istar_];
    return ((v + (1.0 - d) * (1.0 - ph) * cs) / d + (1.0 - ph) * cs) / (ph + (1.0 - ph) * cs);
}

bool CompositeMachine::alternation_trusts(double r, double target) const {
    // Greedy: keep the remaining frequency closest to the overall target.
    const double d = g_.delta;
    return r >= d * target + (1.0 - d) / 2.0;
}

CompositeMachine::State CompositeMachine::initial_state() const {
    State s;
    double rho = aux_.constants().rho;
    s.aux = aux_.initial_state({1.0 - rho, rho, 0.0});
    for (std::size_t j = 0; j < g_.n(); ++j) s.post[j] = g_.prior[j];
    return s;
}


CompositeMachine::State CompositeMachine::enter(State s, const EqState& aux) const {
    s.aux = aux;
    if (s.lied) return s;
    for (std::size_t i = 1; i < aux_.num_types(); ++i)
        if (aux.post[i] >= kRuledOut) return s;
    s.stage = Stage::Signal;
    s.v_signal = aux_.value(aux)[0];
    return s;
}

Prescription CompositeMachine::prescribe(const State& s) const {
    Prescription p;
    const std::size_t n = g_.n();
    switch (s.stage) {
        case Stage::Aux: {
            Prescription a = aux_.prescribe(s.aux);
            p.receiver = a.receiver;
            for (std::size_t i = 0; i < aux_.num_types(); ++i) {
                p.lie_in_l[istar_ + i] = a.lie_in_l[i];
                p.lie_in_h[istar_ + i] = a.lie_in_h[i];
            }
            break;
        }
        case Stage::Signal:
            p.receiver = ReceiverAction::NeverTrust;
            for (std::size_t j = 0; j < n; ++j) {
                bool high = sends_high_at_signal(j);
                p.lie_in_l[j] = high ? 1.0 : 0.0;
                p.lie_in_h[j] = high ? 0.0 : 1.0;
            }
            break;
        case Stage::Alternate:
            if (alternation_trusts(s.r, s.rho_tilde)) {
                p.receiver = ReceiverAction::Trust;
            } else {
                p.receiver = ReceiverAction::NeverTrust;
                for (std::size_t j = 0; j < n; ++j) p.lie_in_l[j] = 1.0;
            }
            break;
        case Stage::Punish:
            return pun_.prescribe(s.pun);
    }
    return p;
}

CompositeMachine::State CompositeMachine::step(const State& s, Omega om, Message m) const {
    const std::size_t n = g_.n();
    Prescription p = prescribe(s);
    State t = s;
    double pm = 0.0;
    t.post = bayes(s.post, n, p, om, m, &pm);
    switch (s.stage) {
        case Stage::Aux:
            t.lied = s.lied || static_cast<int>(m) != static_cast<int>(om);
            return enter(t, aux_.step(s.aux, om, m));
        case Stage::Signal:
            if (m == Message::h) {
                double r = alternation_frequency(s.v_signal);
                if (r < -1e-12 || r > 1.0 + 1e-12) throw ValidationError("alternation frequency outside [0, 1]");
                t.stage = Stage::Alternate;
                t.rho_tilde = t.r = std::clamp(r, 0.0, 1.0);
            } else {
                t.stage = Stage::Punish;
                t.pun = pun_.initial_state();
                t.post = t.pun.post;
            }
            return t;
        case Stage::Alternate: {
            const double d = g_.delta;
            bool trust = alternation_trusts(s.r, s.rho_tilde);
            bool on_path = trust ? static_cast<int>(m) == static_cast<int>(om) : m == Message::h;
            if (!on_path) {
                t.stage = Stage::Punish;
                t.pun = pun_.initial_state();
                t.post = t.pun.post;
                return t;
            }
            t.r = (s.r - (1.0 - d) * (trust ? 1.0 : 0.0)) / d;
            return t;
        }
        case Stage::Punish:
            t.pun = pun_.step(s.pun, om, m);
            t.post = t.pun.post;
            return t;
    }
    return t;
}

TypeArray CompositeMachine::value(const State& s) const {
    TypeArray v{};
    const std::size_t n = g_.n();
    const double d = g_.delta, ph = g_.p_h;
    switch (s.stage) {
        case Stage::Aux: {
            TypeArray a = aux_.value(s.aux);
            for (std::size_t j = 0; j < n; ++j)
                v[j] = j < istar_ ? std::numeric_limits<double>::quiet_NaN() : a[j - istar_];
            break;
        }
        case Stage::Signal: {
            double r = alternation_frequency(s.v_signal);
            TypeArray w = pun_.value(pun_.initial_state());
            for (std::size_t j = 0; j < n; ++j) {
                double c = g_.costs[j];
                v[j] = sends_high_at_signal(j) ? -(1.0 - d) * (1.0 - ph) * c + d * (r * ph + (1.0 - r) * vN_[j])
                                               : -(1.0 - d) * ph * c + d * w[j];
            }
            break;
        }
        case Stage::Alternate:
            for (std::size_t j = 0; j < n; ++j) v[j] = s.r * ph + (1.0 - s.r) * vN_[j];
            break;
        case Stage::Punish:
            return pun_.value(s.pun);
    }
    return v;
}

}  // namespace repcomm
