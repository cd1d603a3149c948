#pragma once

#include "repcomm/stage_game.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace repcomm {

inline constexpr std::size_t kMaxTypes = 12;
using TypeArray = std::array<double, kMaxTypes>;

class NonBayesian : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OffPath : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Receiver map plus, per type, the probability of the untruthful message in each state.
struct Prescription {
    ReceiverAction receiver = ReceiverAction::Trust;
    TypeArray lie_in_l{};  // P(m = h | omega = l)
    TypeArray lie_in_h{};  // P(m = l | omega = h)

    double p_message(std::size_t j, Omega w, Message m) const {
        double lie = w == Omega::l ? lie_in_l[j] : lie_in_h[j];
        bool truthful = static_cast<int>(w) == static_cast<int>(m);
        return truthful ? 1.0 - lie : lie;
    }
};

// Per type, state, message and receiver map.
struct PayoffTable {
    std::array<std::array<std::array<std::array<double, 4>, 2>, 2>, kMaxTypes> u{};

    explicit PayoffTable(const GameParams& g) {
        for (std::size_t j = 0; j < g.n(); ++j)
            for (int w = 0; w < 2; ++w)
                for (int m = 0; m < 2; ++m)
                    for (int b = 0; b < 4; ++b)
                        u[j][w][m][b] = sender_realized<double>(g.costs[j], static_cast<Omega>(w), static_cast<Message>(m),
                                                                static_cast<ReceiverAction>(b), g.view);
    }
    double operator()(std::size_t j, Omega w, Message m, ReceiverAction b) const {
        return u[j][static_cast<int>(w)][static_cast<int>(m)][static_cast<int>(b)];
    }
};

inline SenderAction pure_action(Message in_h, Message in_l) {
    if (in_h == Message::h) return in_l == Message::l ? SenderAction::Honest : SenderAction::AlwaysHigh;
    return in_l == Message::l ? SenderAction::AlwaysLow : SenderAction::Invert;
}

// Bayes update of a posterior after observing (omega, m) under a prescription.
inline TypeArray bayes(const TypeArray& post, std::size_t n, const Prescription& p, Omega w, Message m,
                       double* prob_m = nullptr) {
    TypeArray out{};
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = post[j] * p.p_message(j, w, m);
        s += out[j];
    }
    if (prob_m) *prob_m = s;
    if (s <= 0.0) return post;  // off path: belief left unchanged
    for (std::size_t j = 0; j < n; ++j) out[j] /= s;
    return out;
}

}  // namespace repcomm
