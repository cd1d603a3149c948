#pragma once

#include "repcomm/rational.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace repcomm {

enum class Omega { h = 0, l = 1 };
enum class Message { h = 0, l = 1 };
enum class Act { L = 0, H = 1 };

// Maps from state to message.
enum class SenderAction { Honest = 0, AlwaysHigh = 1, AlwaysLow = 2, Invert = 3 };
// Maps from message to action.
enum class ReceiverAction { Trust = 0, NeverTrust = 1, Oppose = 2, AlwaysAct = 3 };

enum class View { NonConsequentialist, Consequentialist };

inline constexpr std::array<SenderAction, 4> kSenderActions{
    SenderAction::Honest, SenderAction::AlwaysHigh, SenderAction::AlwaysLow, SenderAction::Invert};
inline constexpr std::array<ReceiverAction, 4> kReceiverActions{
    ReceiverAction::Trust, ReceiverAction::NeverTrust, ReceiverAction::Oppose,
    ReceiverAction::AlwaysAct};

std::string to_string(SenderAction a);
std::string to_string(ReceiverAction b);
std::string to_string(View v);
View parse_view(const std::string& s);

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GameParams {
    double p_h = 0.25;
    double delta = 0.99;
    std::vector<double> costs{0.5, 0.2};
    std::vector<double> prior{0.5, 0.5};
    View view = View::NonConsequentialist;

    std::size_t n() const { return costs.size(); }
    double rho_star() const { return p_h / (1.0 - p_h); }
    // Throws ValidationError. allow_ethical admits costs >= 1.
    void validate(bool allow_ethical = false) const;
};

Message message_of(SenderAction a, Omega w);
Act action_of(ReceiverAction b, Message m);

// Realized receiver payoff: 0 after L, +1 after H in h, -1 after H in l.
template <class T>
T receiver_realized(Omega w, Act a) {
    if (a == Act::L) return T(0);
    return w == Omega::h ? T(1) : T(-1);
}

// Per-period sender payoff given the realized state, message and receiver map.
template <class T>
T sender_realized(const T& c, Omega w, Message m, ReceiverAction b, View view) {
    Act a = action_of(b, m);
    T u = a == Act::H ? T(1) : T(0);
    bool lie = static_cast<int>(m) != static_cast<int>(w);
    if (!lie) return u;
    if (view == View::NonConsequentialist) return u - c;
    T best = receiver_realized<T>(w, action_of(b, Message::h));
    T alt = receiver_realized<T>(w, action_of(b, Message::l));
    if (alt > best) best = alt;
    T harm = best - receiver_realized<T>(w, a);
    return u - c * harm;
}

template <class T>
T sender_stage_payoff(const T& p_h, const T& c, SenderAction a, ReceiverAction b, View view) {
    T uh = sender_realized<T>(c, Omega::h, message_of(a, Omega::h), b, view);
    T ul = sender_realized<T>(c, Omega::l, message_of(a, Omega::l), b, view);
    return p_h * uh + (T(1) - p_h) * ul;
}

template <class T>
T receiver_stage_payoff(const T& p_h, SenderAction a, ReceiverAction b) {
    T rh = receiver_realized<T>(Omega::h, action_of(b, message_of(a, Omega::h)));
    T rl = receiver_realized<T>(Omega::l, action_of(b, message_of(a, Omega::l)));
    return p_h * rh + (T(1) - p_h) * rl;
}

double sender_stage_payoff(const GameParams& g, double c, SenderAction a, ReceiverAction b);

using MixedSenderAction = std::array<double, 4>;

void validate_mixed(const MixedSenderAction& alpha);
double receiver_stage_payoff(const GameParams& g, const MixedSenderAction& alpha, ReceiverAction b);
double receiver_stage_payoff(const GameParams& g, SenderAction a, ReceiverAction b);
// Argmax set; ties within 1e-12 are all returned.
std::vector<ReceiverAction> receiver_best_replies(const GameParams& g, const MixedSenderAction& alpha);

// Payoff vectors of the three pure profiles the constructions use:
// (Honest,Trust), (AlwaysHigh,Trust), (AlwaysHigh,NeverTrust).
struct Basis {
    std::vector<double> vH, vL, vN;
};
Basis profile_vectors(const GameParams& g);

}  // namespace repcomm
