#include "repcomm/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace repcomm {

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Phase parse_phase(const std::string& s) {
    for (Phase p : {Phase::Class1, Phase::Class2, Phase::Rebounding, Phase::Absorbing})
        if (to_string(p) == s) return p;
    throw ValidationError("trace: unknown phase '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& col) {
    try {
        std::size_t pos = 0;
        double x = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ValidationError("trace: column '" + col + "' is not a number: '" + s + "'");
    }
}

}  // namespace

void write_trace_csv(std::ostream& os, const PathEnsemble<EqState>& ens, const EquilibriumMachine& m) {
    const std::size_t n = m.num_types();
    os << "path,type,t,phase,eta,pH,pL,pN,low,counter";
    for (std::size_t j = 1; j <= n; ++j) os << ",post_" << j;
    os << ",omega,message,action,payoff";
    for (std::size_t j = 1; j <= n; ++j) os << ",lie_l_" << j;
    for (std::size_t j = 1; j <= n; ++j) os << ",lie_h_" << j;
    os << '\n';
    for (std::size_t p = 0; p < ens.traces.size(); ++p) {
        const auto& rec = ens.traces[p];
        for (std::size_t t = 0; t < rec.steps.size(); ++t) {
            const auto& st = rec.steps[t];
            const EqState& s = st.state;
            Prescription pr = m.prescribe(s);
            os << p << ',' << rec.type + 1 << ',' << t << ',' << to_string(s.phase) << ',' << num(s.eta()) << ','
               << num(s.w[0]) << ',' << num(s.w[1]) << ',' << num(s.w[2]) << ',' << s.low + 1 << ',' << s.counter;
            for (std::size_t j = 0; j < n; ++j) os << ',' << num(s.post[j]);
            os << ',' << (st.omega == Omega::h ? 'h' : 'l') << ',' << (st.message == Message::h ? 'h' : 'l') << ','
               << (action_of(st.receiver, st.message) == Act::H ? 'H' : 'L') << ',' << num(st.payoff);
            for (std::size_t j = 0; j < n; ++j) os << ',' << num(pr.lie_in_l[j]);
            for (std::size_t j = 0; j < n; ++j) os << ',' << num(pr.lie_in_h[j]);
            os << '\n';
        }
    }
}

PathEnsemble<EqState> read_trace_csv(std::istream& is, const EquilibriumMachine& m) {
    const std::size_t n = m.num_types();
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        header = split(line);
        break;
    }
    if (header.empty()) throw ValidationError("trace: missing header");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    auto need = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw ValidationError("trace: missing column '" + name + "'");
        return it->second;
    };
    const std::size_t c_path = need("path"), c_type = need("type"), c_t = need("t"), c_phase = need("phase"),
                      c_ph = need("pH"), c_pl = need("pL"), c_pn = need("pN"), c_low = need("low"),
                      c_cnt = need("counter"), c_om = need("omega"), c_msg = need("message"), c_u = need("payoff");
    std::vector<std::size_t> c_post;
    for (std::size_t j = 1; j <= n; ++j) c_post.push_back(need("post_" + std::to_string(j)));

    PathEnsemble<EqState> ens;
    ens.delta = m.params().delta;
    ens.per_type.assign(n, {});
    ens.config.keep_traces = true;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw ValidationError("trace: row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(header.size()));
        std::size_t path = static_cast<std::size_t>(to_double(cells[c_path], "path"));
        std::size_t type = static_cast<std::size_t>(to_double(cells[c_type], "type"));
        std::size_t t = static_cast<std::size_t>(to_double(cells[c_t], "t"));
        if (type < 1 || type > n) throw ValidationError("trace: type out of range");
        if (path != ens.traces.size() && path + 1 != ens.traces.size())
            throw ValidationError("trace: paths must appear in order");
        if (path == ens.traces.size()) {
            ens.traces.emplace_back();
            ens.traces.back().type = type - 1;
        }
        auto& rec = ens.traces.back();
        if (t != rec.steps.size()) throw ValidationError("trace: periods must be consecutive within a path");
        StepRecord<EqState> st{};
        st.state.phase = parse_phase(cells[c_phase]);
        st.state.w = {to_double(cells[c_ph], "pH"), to_double(cells[c_pl], "pL"), to_double(cells[c_pn], "pN")};
        st.state.low = static_cast<int>(to_double(cells[c_low], "low")) - 1;
        st.state.counter = static_cast<int>(to_double(cells[c_cnt], "counter"));
        if (st.state.low < 0 || st.state.low >= static_cast<int>(n)) throw ValidationError("trace: low out of range");
        for (std::size_t j = 0; j < n; ++j) st.state.post[j] = to_double(cells[c_post[j]], "post");
        auto om = cells[c_om], msg = cells[c_msg];
        if ((om != "h" && om != "l") || (msg != "h" && msg != "l"))
            throw ValidationError("trace: omega and message must be h or l");
        st.omega = om == "h" ? Omega::h : Omega::l;
        st.message = msg == "h" ? Message::h : Message::l;
        st.receiver = m.prescribe(st.state).receiver;
        st.payoff = to_double(cells[c_u], "payoff");
        rec.steps.push_back(st);
    }
    for (auto& rec : ens.traces) {
        double disc = 1.0, total = 0.0;
        for (const auto& st : rec.steps) {
            total += (1.0 - ens.delta) * disc * st.payoff;
            disc *= ens.delta;
        }
        rec.discounted = total;
        ens.per_type[rec.type].add(total);
        ens.periods += rec.steps.size();
    }
    ens.config.paths = ens.traces.size();
    ens.config.horizon = ens.traces.empty() ? 0 : ens.traces.front().steps.size();
    return ens;
}

VerificationReport verify_trace(const PathEnsemble<EqState>& ens, const EquilibriumMachine& m) {
    std::size_t horizon = 0;
    for (const auto& rec : ens.traces) horizon = std::max(horizon, rec.steps.size());
    EqTraceObserver obs(m, horizon);
    Check trans("trace_transition", true, 1e-9);
    Check presc("trace_payoff", true, 1e-12);
    const PayoffTable& table = m.payoffs();
    for (std::size_t p = 0; p < ens.traces.size(); ++p) {
        const auto& rec = ens.traces[p];
        obs.begin_path(p, rec.type);
        for (std::size_t t = 0; t < rec.steps.size(); ++t) {
            const auto& st = rec.steps[t];
            Prescription pr = m.prescribe(st.state);
            EqState next = m.step(st.state, st.omega, st.message);
            presc.record(std::abs(st.payoff - table(rec.type, st.omega, st.message, pr.receiver)), p, t);
            if (t + 1 < rec.steps.size()) {
                const EqState& got = rec.steps[t + 1].state;
                double diff = 0.0;
                for (int i = 0; i < 3; ++i) diff = std::max(diff, std::abs(got.w[i] - next.w[i]));
                for (std::size_t j = 0; j < m.num_types(); ++j) diff = std::max(diff, std::abs(got.post[j] - next.post[j]));
                if (got.phase != next.phase || got.low != next.low || got.counter != next.counter) diff = 1.0;
                trans.record(diff, p, t + 1);
                if (trans.path == p && trans.t == t + 1) trans.where = describe(got);
            }
            obs.on_step(p, t, st.state, pr, st.omega, st.message, SenderAction::Honest, st.payoff, next);
        }
        obs.end_path(p, rec.type, rec.discounted);
    }
    VerificationReport rep = obs.report();
    rep.checks.push_back(trans);
    rep.checks.push_back(presc);
    return rep;
}

}  // namespace repcomm
