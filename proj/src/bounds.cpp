#include "repcomm/bounds.hpp"

namespace repcomm {

Primitives<double> approx(const GameParams& g) { return {g.p_h, g.costs, g.view}; }

Primitives<Rational> exact(const GameParams& g) {
    Primitives<Rational> P{to_rational(g.p_h), {}, g.view};
    for (double c : g.costs) P.costs.push_back(to_rational(c));
    return P;
}

Attainability commitment_attainable(const GameParams& g) {
    g.validate(true);
    bool has_nonethical = false;
    std::optional<double> cstar;
    for (double c : g.costs) {
        if (c < 1.0) has_nonethical = true;
        else if (!cstar || c < *cstar) cstar = c;
    }
    if (!has_nonethical) throw ValidationError("commitment_attainable needs at least one cost < 1");
    if (!cstar) return {false, std::nullopt, "no ethical type"};
    Rational c1 = to_rational(g.costs.front());
    Rational cs = to_rational(*cstar);
    bool ok = c1 * (cs - 1) <= 2;
    return {ok, cstar, ok ? "c_1(c*-1) <= 2" : "c_1(c*-1) > 2"};
}

PayoffVector v_star(const GameParams& g) { return v_star(approx(g)); }
PayoffVector v_star_star(const GameParams& g) { return v_star_star(approx(g)); }
PayoffVector v_dagger(const GameParams& g) { return v_dagger(approx(g)); }

EthicalBounds<double> ethical_bounds(const GameParams& g, double c) {
    return ethical_bounds<double>(g.p_h, g.costs.front(), c);
}

PayoffVector v_of_rho(const GameParams& g, double rho) { return v_of_rho(approx(g), rho); }
PayoffVector v_target(const GameParams& g, double rho) { return v_target(approx(g), rho); }
Polytope<double> polytope(const GameParams& g) { return polytope(approx(g)); }
PayoffVector w_of_rho_prime(const GameParams& g, double rho_prime) { return w_of_rho_prime(approx(g), rho_prime); }

}  // namespace repcomm
