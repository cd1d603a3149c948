#include "repcomm/stage_game.hpp"

#include <cmath>
#include <sstream>

namespace repcomm {

std::string to_string(SenderAction a) {
    switch (a) {
        case SenderAction::Honest: return "Honest";
        case SenderAction::AlwaysHigh: return "AlwaysHigh";
        case SenderAction::AlwaysLow: return "AlwaysLow";
        case SenderAction::Invert: return "Invert";
    }
    return "?";
}

std::string to_string(ReceiverAction b) {
    switch (b) {
        case ReceiverAction::Trust: return "Trust";
        case ReceiverAction::NeverTrust: return "NeverTrust";
        case ReceiverAction::Oppose: return "Oppose";
        case ReceiverAction::AlwaysAct: return "AlwaysAct";
    }
    return "?";
}

std::string to_string(View v) {
    return v == View::NonConsequentialist ? "nonconsequentialist" : "consequentialist";
}

View parse_view(const std::string& s) {
    if (s == "nonconsequentialist" || s == "nc" || s == "NonConsequentialist") return View::NonConsequentialist;
    if (s == "consequentialist" || s == "cq" || s == "Consequentialist") return View::Consequentialist;
    throw ValidationError("view: expected nonconsequentialist|consequentialist, got '" + s + "'");
}

void GameParams::validate(bool allow_ethical) const {
    if (!(p_h > 0.0 && p_h < 0.5)) throw ValidationError("p_h must lie in (0, 0.5)");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
    if (costs.empty()) throw ValidationError("costs must be nonempty");
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (!(costs[i] >= 0.0)) throw ValidationError("costs must be nonnegative");
        if (i > 0 && !(costs[i] < costs[i - 1])) throw ValidationError("costs must be strictly decreasing");
    }
    if (!allow_ethical && costs.front() >= 1.0) throw ValidationError("costs must be < 1 in this regime");
    if (prior.size() != costs.size()) throw ValidationError("prior must have one entry per cost");
    double s = 0.0;
    for (double p : prior) {
        if (!(p > 0.0)) throw ValidationError("prior entries must be positive");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("prior must sum to 1");
}

Message message_of(SenderAction a, Omega w) {
    switch (a) {
        case SenderAction::Honest: return w == Omega::h ? Message::h : Message::l;
        case SenderAction::AlwaysHigh: return Message::h;
        case SenderAction::AlwaysLow: return Message::l;
        case SenderAction::Invert: return w == Omega::h ? Message::l : Message::h;
    }
    return Message::h;
}

Act action_of(ReceiverAction b, Message m) {
    switch (b) {
        case ReceiverAction::Trust: return m == Message::h ? Act::H : Act::L;
        case ReceiverAction::NeverTrust: return Act::L;
        case ReceiverAction::Oppose: return m == Message::h ? Act::L : Act::H;
        case ReceiverAction::AlwaysAct: return Act::H;
    }
    return Act::L;
}

double sender_stage_payoff(const GameParams& g, double c, SenderAction a, ReceiverAction b) {
    if (c < 0.0) throw ValidationError("lying cost must be nonnegative");
    return sender_stage_payoff<double>(g.p_h, c, a, b, g.view);
}

void validate_mixed(const MixedSenderAction& alpha) {
    double s = 0.0;
    for (double x : alpha) {
        if (x < 0.0) throw ValidationError("mixed action has a negative entry");
        s += x;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("mixed action must sum to 1");
}

double receiver_stage_payoff(const GameParams& g, SenderAction a, ReceiverAction b) {
    return receiver_stage_payoff<double>(g.p_h, a, b);
}

double receiver_stage_payoff(const GameParams& g, const MixedSenderAction& alpha, ReceiverAction b) {
    double u = 0.0;
    for (std::size_t i = 0; i < 4; ++i) u += alpha[i] * receiver_stage_payoff(g, kSenderActions[i], b);
    return u;
}

std::vector<ReceiverAction> receiver_best_replies(const GameParams& g, const MixedSenderAction& alpha) {
    validate_mixed(alpha);
    std::array<double, 4> u{};
    double best = -1e300;
    for (std::size_t i = 0; i < 4; ++i) {
        u[i] = receiver_stage_payoff(g, alpha, kReceiverActions[i]);
        best = std::max(best, u[i]);
    }
    std::vector<ReceiverAction> out;
    for (std::size_t i = 0; i < 4; ++i)
        if (u[i] >= best - 1e-12) out.push_back(kReceiverActions[i]);
    return out;
}

Basis profile_vectors(const GameParams& g) {
    Basis b;
    for (double c : g.costs) {
        b.vH.push_back(sender_stage_payoff<double>(g.p_h, c, SenderAction::Honest, ReceiverAction::Trust, g.view));
        b.vL.push_back(sender_stage_payoff<double>(g.p_h, c, SenderAction::AlwaysHigh, ReceiverAction::Trust, g.view));
        b.vN.push_back(sender_stage_payoff<double>(g.p_h, c, SenderAction::AlwaysHigh, ReceiverAction::NeverTrust, g.view));
    }
    return b;
}

}  // namespace repcomm
