#include "repcomm/occupation_lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace repcomm {

std::string to_string(Program p) {
    switch (p) {
        case Program::ThmOne: return "ThmOne";
        case Program::VbarEthical: return "VbarEthical";
        case Program::VunderEthical: return "VunderEthical";
    }
    return "?";
}

Program parse_program(const std::string& s) {
    if (s == "ThmOne" || s == "thm1") return Program::ThmOne;
    if (s == "VbarEthical" || s == "vbar") return Program::VbarEthical;
    if (s == "VunderEthical" || s == "vunder") return Program::VunderEthical;
    throw ValidationError("program: expected ThmOne|VbarEthical|VunderEthical, got '" + s + "'");
}

namespace {

// A face of one block's local polyhedron: {p + N t}.
template <class T>
struct Face {
    Vec<T> p;
    std::vector<Vec<T>> N;
};

// Row: coef . x >= rhs.
template <class T>
struct Row {
    Vec<T> coef;
    T rhs;
};

template <class T>
T dot(const Vec<T>& a, const Vec<T>& b) {
    T s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Solves rows[i].coef . x = rows[i].rhs; returns nullopt unless the rows are independent.
template <class T>
std::optional<Face<T>> affine_solution(const std::vector<const Row<T>*>& rows, std::size_t k) {
    std::size_t m = rows.size();
    std::vector<Vec<T>> A(m, Vec<T>(k + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) A[i][j] = rows[i]->coef[j];
        A[i][k] = rows[i]->rhs;
    }
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t col = 0; col < k && r < m; ++col) {
        std::size_t best = m;
        for (std::size_t i = r; i < m; ++i) {
            if (Scalar<T>::is_zero(A[i][col])) continue;
            if (best == m) best = i;
            if constexpr (std::is_same_v<T, double>)
                if (std::abs(A[i][col]) > std::abs(A[best][col])) best = i;
        }
        if (best == m) continue;
        std::swap(A[r], A[best]);
        T piv = A[r][col];
        for (std::size_t j = 0; j <= k; ++j) A[r][j] /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || Scalar<T>::is_zero(A[i][col])) continue;
            T f = A[i][col];
            for (std::size_t j = 0; j <= k; ++j) A[i][j] -= f * A[r][j];
        }
        pivots.push_back(col);
        ++r;
    }
    if (r < m) return std::nullopt;
    Face<T> f;
    f.p.assign(k, T(0));
    for (std::size_t i = 0; i < r; ++i) f.p[pivots[i]] = A[i][k];
    for (std::size_t col = 0; col < k; ++col) {
        if (std::find(pivots.begin(), pivots.end(), col) != pivots.end()) continue;
        Vec<T> v(k, T(0));
        v[col] = T(1);
        for (std::size_t i = 0; i < r; ++i) v[pivots[i]] = -A[i][col];
        f.N.push_back(std::move(v));
    }
    return f;
}

template <class T>
bool satisfies(const Row<T>& row, const Vec<T>& x) {
    return Scalar<T>::geq(dot(row.coef, x), row.rhs);
}

template <class T>
void subsets(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Solves a small square system; nullopt if singular.
template <class T>
std::optional<Vec<T>> solve_square(std::vector<Vec<T>> A, Vec<T> b) {
    std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best = n;
        for (std::size_t i = c; i < n; ++i) {
            if (Scalar<T>::is_zero(A[i][c])) continue;
            if (best == n) best = i;
            if constexpr (std::is_same_v<T, double>)
                if (std::abs(A[i][c]) > std::abs(A[best][c])) best = i;
        }
        if (best == n) return std::nullopt;
        std::swap(A[c], A[best]);
        std::swap(b[c], b[best]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c) continue;
            T f = A[i][c] / A[c][c];
            if (Scalar<T>::is_zero(f)) continue;
            for (std::size_t j = c; j < n; ++j) A[i][j] -= f * A[c][j];
            b[i] -= f * b[c];
        }
    }
    Vec<T> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

template <class T>
struct Problem {
    std::vector<SenderAction> support;
    std::array<Vec<T>, 4> obj;                 // per receiver block, per support entry
    std::array<std::vector<Row<T>>, 4> local;  // per block
    std::array<Vec<T>, 4> side_coef;           // one global inequality (optional)
    T side_rhs{};
    bool has_side = false;
};

template <class T>
std::optional<std::pair<T, std::array<Vec<T>, 4>>> maximize(const Problem<T>& pr) {
    const std::size_t k = pr.support.size();
    std::array<std::array<std::vector<Face<T>>, 3>, 4> faces;
    for (std::size_t b = 0; b < 4; ++b) {
        const auto& rows = pr.local[b];
        for (std::size_t d = 0; d <= 2 && d <= k; ++d) {
            auto& out = faces[b][d];
            subsets<T>(rows.size(), k - d, [&](const std::vector<std::size_t>& idx) {
                std::vector<const Row<T>*> sel;
                for (std::size_t i : idx) sel.push_back(&rows[i]);
                auto f = affine_solution(sel, k);
                if (!f || f->N.size() != d) return;
                if (d == 0) {
                    for (const auto& r : rows)
                        if (!satisfies(r, f->p)) return;
                    for (const auto& g : out)
                        if (g.p == f->p) return;
                }
                out.push_back(std::move(*f));
            });
        }
    }

    std::optional<std::pair<T, std::array<Vec<T>, 4>>> best;
    std::array<const Face<T>*, 4> pick{};
    std::array<std::size_t, 4> dims{};

    auto evaluate = [&]() {
        // Unknowns: the free coordinates of every chosen face.
        std::vector<std::pair<std::size_t, std::size_t>> unk;
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t i = 0; i < pick[b]->N.size(); ++i) unk.emplace_back(b, i);
        std::size_t m = unk.size();
        std::vector<Vec<T>> A;
        Vec<T> rhs;
        auto add_global = [&](const std::array<Vec<T>, 4>& coef, const T& r) {
            Vec<T> row(m, T(0));
            T base(0);
            for (std::size_t b = 0; b < 4; ++b) base += dot(coef[b], pick[b]->p);
            for (std::size_t u = 0; u < m; ++u) row[u] = dot(coef[unk[u].first], pick[unk[u].first]->N[unk[u].second]);
            A.push_back(std::move(row));
            rhs.push_back(r - base);
        };
        std::array<Vec<T>, 4> ones;
        for (auto& o : ones) o.assign(k, T(1));
        add_global(ones, T(1));
        if (m == 2) add_global(pr.side_coef, pr.side_rhs);
        auto t = solve_square(A, rhs);
        if (!t) return;
        std::array<Vec<T>, 4> x;
        for (std::size_t b = 0; b < 4; ++b) x[b] = pick[b]->p;
        for (std::size_t u = 0; u < m; ++u) {
            auto [b, i] = unk[u];
            for (std::size_t s = 0; s < k; ++s) x[b][s] += (*t)[u] * pick[b]->N[i][s];
        }
        for (std::size_t b = 0; b < 4; ++b) {
            if (dims[b] == 0) continue;
            for (const auto& r : pr.local[b])
                if (!satisfies(r, x[b])) return;
        }
        if (pr.has_side) {
            T s(0);
            for (std::size_t b = 0; b < 4; ++b) s += dot(pr.side_coef[b], x[b]);
            if (!Scalar<T>::geq(s, pr.side_rhs)) return;
        }
        T v(0);
        for (std::size_t b = 0; b < 4; ++b) v += dot(pr.obj[b], x[b]);
        if (!best || v > best->first) best = std::make_pair(v, x);
    };

    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t b, std::size_t left) {
        if (b == 4) {
            if (left == 0) evaluate();
            return;
        }
        for (std::size_t d = 0; d <= std::min<std::size_t>(left, 2); ++d) {
            if (d > k) break;
            for (const auto& f : faces[b][d]) {
                pick[b] = &f;
                dims[b] = d;
                rec(b + 1, left - d);
            }
        }
    };
    rec(0, 1);
    if (pr.has_side) rec(0, 2);
    return best;
}

template <class T>
Problem<T> base_problem(const Primitives<T>& P, const ProgramSpec& spec, const T& obj_cost, bool minimize) {
    Problem<T> pr;
    if (spec.support == Support::Restricted)
        pr.support = {SenderAction::Honest, SenderAction::AlwaysHigh};
    else
        pr.support.assign(kSenderActions.begin(), kSenderActions.end());
    T eps = Scalar<T>::from(spec.eps);
    for (std::size_t bi = 0; bi < 4; ++bi) {
        ReceiverAction b = kReceiverActions[bi];
        for (SenderAction a : pr.support) {
            T u = sender_stage_payoff<T>(P.p_h, obj_cost, a, b, P.view);
            pr.obj[bi].push_back(minimize ? T(-u) : u);
        }
        for (std::size_t s = 0; s < pr.support.size(); ++s) {
            Vec<T> e(pr.support.size(), T(0));
            e[s] = T(1);
            pr.local[bi].push_back({e, T(0)});
        }
        for (ReceiverAction b2 : kReceiverActions) {
            if (b2 == b) continue;
            Vec<T> coef;
            for (SenderAction a : pr.support)
                coef.push_back(receiver_stage_payoff<T>(P.p_h, a, b) - receiver_stage_payoff<T>(P.p_h, a, b2));
            pr.local[bi].push_back({coef, T(-eps)});
        }
    }
    return pr;
}

template <class T>
void set_side(Problem<T>& pr, const Primitives<T>& P, const T& c, const T& sign, const T& rhs) {
    pr.has_side = true;
    pr.side_rhs = rhs;
    for (std::size_t bi = 0; bi < 4; ++bi) {
        pr.side_coef[bi].clear();
        for (SenderAction a : pr.support)
            pr.side_coef[bi].push_back(sign * sender_stage_payoff<T>(P.p_h, c, a, kReceiverActions[bi], P.view));
    }
}

template <class T>
JointDistribution<T> to_joint(const Problem<T>& pr, const std::array<Vec<T>, 4>& x) {
    JointDistribution<T> g{};
    for (auto& row : g) row.fill(T(0));
    for (std::size_t bi = 0; bi < 4; ++bi)
        for (std::size_t s = 0; s < pr.support.size(); ++s) g[static_cast<int>(pr.support[s])][bi] = x[bi][s];
    return g;
}

}  // namespace

template <class T>
LPResult<T> solve_program(const Primitives<T>& P, const ProgramSpec& spec) {
    if (spec.eps < 0.0) throw ValidationError("eps must be nonnegative");
    if (spec.objective >= P.n()) throw ValidationError("objective index out of range");
    const T& c = P.costs[spec.objective];
    LPResult<T> res;
    switch (spec.program) {
        case Program::ThmOne: {
            auto pr = base_problem(P, spec, c, false);
            set_side(pr, P, P.costs.front(), T(-1), T(-P.p_h));
            auto r = maximize(pr);
            if (!r) return res;
            res.feasible = true;
            res.value = r->first;
            res.gamma = to_joint(pr, r->second);
            return res;
        }
        case Program::VbarEthical: {
            if (c < T(1)) throw ValidationError("VbarEthical objective must be an ethical type");
            T rs = P.rho_star();
            for (std::size_t i = 0; i < P.n(); ++i) {
                const T& cp = P.costs[i];
                if (cp >= T(1)) continue;
                auto pr = base_problem(P, spec, c, false);
                set_side(pr, P, cp, T(1), T(P.p_h + rs * (T(1) - P.p_h) * (T(1) - cp)));
                auto r = maximize(pr);
                if (!r) continue;
                if (!res.feasible || r->first > res.value) {
                    res.feasible = true;
                    res.value = r->first;
                    res.gamma = to_joint(pr, r->second);
                    res.witness = i;
                }
            }
            return res;
        }
        case Program::VunderEthical: {
            if (c < T(1)) throw ValidationError("VunderEthical objective must be an ethical type");
            auto pr = base_problem(P, spec, c, true);
            set_side(pr, P, P.costs.front(), T(1), T(0));
            auto r = maximize(pr);
            if (!r) return res;
            res.feasible = true;
            res.value = -r->first;
            res.gamma = to_joint(pr, r->second);
            return res;
        }
    }
    return res;
}

template LPResult<double> solve_program(const Primitives<double>&, const ProgramSpec&);
template LPResult<Rational> solve_program(const Primitives<Rational>&, const ProgramSpec&);

namespace {
void validate_for(const GameParams& g, const ProgramSpec& spec) {
    g.validate(spec.program != Program::ThmOne);
}
}  // namespace

LPResult<double> solve(const GameParams& g, const ProgramSpec& spec) {
    validate_for(g, spec);
    auto r = solve_program(approx(g), spec);
    if (!r.feasible) throw Infeasible(to_string(spec.program) + ": feasible set is empty");
    return r;
}

LPResult<Rational> solve_exact(const GameParams& g, const ProgramSpec& spec) {
    validate_for(g, spec);
    auto r = solve_program(exact(g), spec);
    if (!r.feasible) throw Infeasible(to_string(spec.program) + ": feasible set is empty");
    return r;
}

std::vector<double> solve_eps_family(const GameParams& g, std::size_t j, const std::vector<double>& eps_list,
                                     bool exact_mode) {
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (eps_list[i] < 0.0) throw ValidationError("eps must be nonnegative");
        if (i > 0 && eps_list[i] > eps_list[i - 1]) throw ValidationError("eps_list must be sorted descending");
    }
    std::vector<double> out;
    for (double e : eps_list) {
        ProgramSpec spec{Program::ThmOne, j, e, Support::Restricted};
        out.push_back(exact_mode ? solve_exact(g, spec).value.get_d() : solve(g, spec).value);
    }
    return out;
}

FeasibilityReport check_feasible(const JointDistribution<double>& gamma, const GameParams& g, double eps) {
    FeasibilityReport rep;
    auto push = [&](std::string name, double slack, double tol) {
        bool ok = slack >= -tol;
        rep.constraints.push_back({std::move(name), slack, ok});
        rep.feasible = rep.feasible && ok;
    };
    double total = 0.0;
    double min_cell = 0.0;
    for (const auto& row : gamma)
        for (double x : row) {
            total += x;
            min_cell = std::min(min_cell, x);
        }
    push("nonnegative", min_cell, 1e-12);
    push("sum_to_one", -std::abs(total - 1.0), 1e-12);
    double u1 = 0.0;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            u1 += gamma[a][b] * sender_stage_payoff<double>(g.p_h, g.costs.front(), kSenderActions[a],
                                                          kReceiverActions[b], g.view);
    rep.sender_c1_slack = g.p_h - u1;
    push("c1_payoff_le_ph", rep.sender_c1_slack, 1e-12);
    for (std::size_t b = 0; b < 4; ++b) {
        for (std::size_t b2 = 0; b2 < 4; ++b2) {
            if (b2 == b) continue;
            double s = 0.0;
            for (std::size_t a = 0; a < 4; ++a)
                s += gamma[a][b] * (receiver_stage_payoff(g, kSenderActions[a], kReceiverActions[b]) -
                                    receiver_stage_payoff(g, kSenderActions[a], kReceiverActions[b2]));
            push("br_" + to_string(kReceiverActions[b]) + "_vs_" + to_string(kReceiverActions[b2]), s + eps, 1e-12);
        }
    }
    return rep;
}

void OccupationAccumulator::begin_path() {
    weight_ = 1.0;
    for (auto& row : cur_) row.fill(0.0);
}

void OccupationAccumulator::add(SenderAction a, ReceiverAction b) {
    cur_[static_cast<int>(a)][static_cast<int>(b)] += (1.0 - delta_) * weight_;
    weight_ *= delta_;
}

void OccupationAccumulator::end_path() {
    double mass = 1.0 - weight_;
    max_trunc_ = std::max(max_trunc_, weight_);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) sum_[a][b] += cur_[a][b] / mass;
    ++paths_;
}

JointDistribution<double> OccupationAccumulator::measure() const {
    if (paths_ == 0) throw ValidationError("occupation measure of an empty ensemble");
    JointDistribution<double> out{};
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) out[a][b] = sum_[a][b] / static_cast<double>(paths_);
    return out;
}

JointDistribution<double> occupation_measure(const std::vector<ProfileSequence>& paths, double delta,
                                             double* truncated_mass) {
    if (paths.empty()) throw ValidationError("occupation measure of an empty ensemble");
    OccupationAccumulator acc(delta);
    for (const auto& p : paths) {
        acc.begin_path();
        for (auto [a, b] : p) acc.add(a, b);
        acc.end_path();
    }
    if (truncated_mass) *truncated_mass = acc.max_truncation();
    return acc.measure();
}

}  // namespace repcomm
