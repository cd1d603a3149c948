#pragma once

#include "repcomm/stage_game.hpp"

#include <optional>
#include <string>
#include <vector>

namespace repcomm {

template <class T>
using Vec = std::vector<T>;
using PayoffVector = std::vector<double>;

// Primitives in scalar type T (double or Rational).
template <class T>
struct Primitives {
    T p_h;
    Vec<T> costs;
    View view = View::NonConsequentialist;

    T rho_star() const { return p_h / (T(1) - p_h); }
    std::size_t n() const { return costs.size(); }
};

Primitives<double> approx(const GameParams& g);
Primitives<Rational> exact(const GameParams& g);

template <class T>
struct BasisT {
    Vec<T> vH, vL, vN;
};

template <class T>
BasisT<T> basis(const Primitives<T>& P) {
    BasisT<T> b;
    for (const T& c : P.costs) {
        b.vH.push_back(sender_stage_payoff<T>(P.p_h, c, SenderAction::Honest, ReceiverAction::Trust, P.view));
        b.vL.push_back(sender_stage_payoff<T>(P.p_h, c, SenderAction::AlwaysHigh, ReceiverAction::Trust, P.view));
        b.vN.push_back(sender_stage_payoff<T>(P.p_h, c, SenderAction::AlwaysHigh, ReceiverAction::NeverTrust, P.view));
    }
    return b;
}

template <class T>
Vec<T> combine(const T& a, const Vec<T>& x, const T& b, const Vec<T>& y, const T& c, const Vec<T>& z) {
    Vec<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
    return out;
}

template <class T>
void require_nonethical(const Primitives<T>& P) {
    for (const T& c : P.costs)
        if (c >= T(1)) throw ValidationError("operation requires all costs < 1");
}

template <class T>
Vec<T> v_star(const Primitives<T>& P) {
    require_nonethical(P);
    const T& c1 = P.costs.front();
    Vec<T> out;
    for (const T& c : P.costs)
        out.push_back(P.p_h * (T(1) + (c1 - c) / (T(2) * P.p_h + c1 * (T(1) - T(2) * P.p_h))));
    return out;
}

template <class T>
Vec<T> v_star_star(const Primitives<T>& P) {
    Vec<T> out;
    for (const T& c : P.costs) out.push_back(P.p_h + P.p_h * (T(1) - c));
    return out;
}

template <class T>
Vec<T> v_dagger(const Primitives<T>& P) {
    require_nonethical(P);
    const T& c1 = P.costs.front();
    Vec<T> out;
    for (const T& c : P.costs) out.push_back(P.p_h * (T(2) - c) / (T(2) - c1));
    return out;
}

template <class T>
struct EthicalBounds {
    T vbar, vunder;
};

template <class T>
EthicalBounds<T> ethical_bounds(const T& p_h, const T& c1, const T& c) {
    if (c < T(1)) throw ValidationError("ethical cost must be >= 1");
    if (c > c1) throw ValidationError("ethical cost must not exceed c_1");
    return {p_h * (T(2) - c), p_h * (c1 - c) / (T(1) + c1)};
}

// Weight on the (vH, vL) block that pins entry 1 of the mixture to vH_1.
template <class T>
T q_of_rho(const BasisT<T>& B, const T& rho) {
    return (B.vH[0] - B.vN[0]) / (rho * B.vL[0] + (T(1) - rho) * B.vH[0] - B.vN[0]);
}

template <class T>
void check_rho(const Primitives<T>& P, const T& rho) {
    T hi = P.rho_star();
    if constexpr (std::is_same_v<T, double>) hi += 1e-12;
    if (rho < T(0) || rho > hi) throw ValidationError("rho must lie in [0, rho*]");
}

// Weights on (vH, vL, vN) of the mixture delivering v_target(rho).
template <class T>
std::array<T, 3> target_weights(const Primitives<T>& P, const T& rho) {
    check_rho(P, rho);
    BasisT<T> B = basis(P);
    T q = q_of_rho(B, rho);
    return {q * (T(1) - rho), q * rho, T(1) - q};
}

// Weights on (vH, vL, vN) as printed for v(rho).
template <class T>
std::array<T, 3> printed_weights(const Primitives<T>& P, const T& rho) {
    check_rho(P, rho);
    const T& c1 = P.costs.front();
    T d = rho * (T(1) - c1) + c1;
    return {(T(1) - rho) * c1 / d, rho * c1 / d, rho * (T(1) - c1) / d};
}

template <class T>
Vec<T> mix(const BasisT<T>& B, const std::array<T, 3>& w) {
    return combine(w[0], B.vH, w[1], B.vL, w[2], B.vN);
}

template <class T>
Vec<T> v_of_rho(const Primitives<T>& P, const T& rho) {
    return mix(basis(P), printed_weights(P, rho));
}

template <class T>
Vec<T> v_target(const Primitives<T>& P, const T& rho) {
    return mix(basis(P), target_weights(P, rho));
}

template <class T>
struct Polytope {
    Vec<T> vH, vstar, vbar, vunder;
    T p_star, q_star;
};

template <class T>
Polytope<T> polytope(const Primitives<T>& P) {
    require_nonethical(P);
    BasisT<T> B = basis(P);
    T rs = P.rho_star();
    Polytope<T> out;
    out.vH = B.vH;
    out.vstar = v_target(P, rs);
    out.p_star = -B.vN[0] / (B.vH[0] - B.vN[0]);
    out.q_star = -B.vN[0] / (rs * B.vL[0] + (T(1) - rs) * B.vH[0] - B.vN[0]);
    out.vbar = combine<T>(out.q_star * rs, B.vL, out.q_star * (T(1) - rs), B.vH, T(1) - out.q_star, B.vN);
    out.vunder = combine<T>(out.p_star, B.vH, T(0), B.vL, T(1) - out.p_star, B.vN);
    return out;
}

// Weights on (vH, vO, vN) of w(rho'); vO is the zero vector.
template <class T>
std::array<T, 3> punish_weights(const Primitives<T>& P, const T& rho_prime) {
    T rs = P.rho_star();
    T lo = rs;
    if constexpr (std::is_same_v<T, double>) lo -= 1e-12;
    if (rho_prime < lo || rho_prime > T(1)) throw ValidationError("rho' must lie in [rho*, 1]");
    const T& c1 = P.costs.front();
    T d = P.p_h + rho_prime * (T(1) - P.p_h) * c1;
    return {rho_prime * (T(1) - P.p_h) * c1 / d, (T(1) - rho_prime) * P.p_h / d, rho_prime * P.p_h / d};
}

template <class T>
Vec<T> w_of_rho_prime(const Primitives<T>& P, const T& rho_prime) {
    auto w = punish_weights(P, rho_prime);
    BasisT<T> B = basis(P);
    Vec<T> out;
    for (std::size_t i = 0; i < P.n(); ++i) out.push_back(w[0] * B.vH[i] + w[2] * B.vN[i]);
    return out;
}

struct Attainability {
    bool attainable = false;
    std::optional<double> witness;
    std::string reason;
};

Attainability commitment_attainable(const GameParams& g);

// Double-precision conveniences.
PayoffVector v_star(const GameParams& g);
PayoffVector v_star_star(const GameParams& g);
PayoffVector v_dagger(const GameParams& g);
EthicalBounds<double> ethical_bounds(const GameParams& g, double c);
PayoffVector v_of_rho(const GameParams& g, double rho);
PayoffVector v_target(const GameParams& g, double rho);
Polytope<double> polytope(const GameParams& g);
PayoffVector w_of_rho_prime(const GameParams& g, double rho_prime);

}  // namespace repcomm
