#include "dqas/circuit_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace dqas {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

int parse_int(std::string_view token, int line) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError(line, "bad qubit index '" + std::string(token) + "'");
    }
    return value;
}

double parse_double(std::string_view token, int line) {
    // std::from_chars for double is unavailable on older libstdc++.
    std::string copy(token);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(copy, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != copy.size() || copy.empty()) {
        throw ParseError(line, "bad parameter '" + copy + "'");
    }
    return value;
}

} // namespace

std::vector<Moment> parse_circuit(std::string_view text) {
    std::vector<Moment> moments(1);
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line == "---") {
            moments.emplace_back();
            continue;
        }
        std::istringstream fields{std::string(line)};
        std::string name, qubits, param, extra;
        fields >> name >> qubits >> param >> extra;
        if (qubits.empty()) {
            throw ParseError(line_no, "missing qubit list");
        }
        if (!extra.empty()) {
            throw ParseError(line_no, "trailing tokens after parameter");
        }
        Gate g;
        try {
            g.kind = parse_gate_kind(name);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        std::vector<int> qs;
        std::string_view rest = qubits;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            qs.push_back(parse_int(rest.substr(0, comma), line_no));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        if (static_cast<int>(qs.size()) != g.arity()) {
            throw ParseError(line_no, fmt::format("{} expects {} qubit(s), got {}", gate_name(g.kind),
                                                  g.arity(), qs.size()));
        }
        for (std::size_t i = 0; i < qs.size(); ++i) {
            if (qs[i] < 0) {
                throw ParseError(line_no, "negative qubit index");
            }
            g.qubits[i] = qs[i];
        }
        if (g.arity() == 2 && g.qubits[0] == g.qubits[1]) {
            throw ParseError(line_no, "two-qubit gate on a single qubit");
        }
        if (gate_has_param(g.kind)) {
            if (param.empty()) {
                throw ParseError(line_no, fmt::format("{} requires a parameter", gate_name(g.kind)));
            }
            g.param = parse_double(param, line_no);
        } else if (!param.empty()) {
            throw ParseError(line_no, fmt::format("{} takes no parameter", gate_name(g.kind)));
        }
        moments.back().gates.push_back(g);
    }
    return moments;
}

std::vector<Moment> read_circuit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open circuit file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_circuit(buffer.str());
}

std::string format_gate(const Gate& g) {
    std::string out(gate_name(g.kind));
    out += ' ';
    out += std::to_string(g.qubits[0]);
    if (g.arity() == 2) {
        out += ',';
        out += std::to_string(g.qubits[1]);
    }
    if (gate_has_param(g.kind)) {
        out += fmt::format(" {:.10f}", g.param);
    }
    return out;
}

std::string format_circuit(const std::vector<Moment>& moments) {
    std::string out;
    for (std::size_t m = 0; m < moments.size(); ++m) {
        if (m > 0) {
            out += "---\n";
        }
        for (const auto& g : moments[m].gates) {
            out += format_gate(g);
            out += '\n';
        }
    }
    return out;
}

std::string format_circuit(const std::vector<Gate>& gates) {
    std::string out;
    for (const auto& g : gates) {
        out += format_gate(g);
        out += '\n';
    }
    return out;
}

std::vector<Gate> flatten(const std::vector<Moment>& moments) {
    std::vector<Gate> gates;
    for (const auto& m : moments) {
        gates.insert(gates.end(), m.gates.begin(), m.gates.end());
    }
    return gates;
}

} // namespace dqas
