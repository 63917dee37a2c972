#include "cultivator/circuit.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

namespace cultiv {

namespace {

constexpr std::array<OpInfo, 34> kOpTable = {{
    {"R", 1, false, true, false},
    {"M", 1, false, true, false},
    {"TICK", 0, false, true, false},
    {"H", 1, true, true, false},
    {"S", 1, true, true, false},
    {"S_DAG", 1, true, true, false},
    {"X", 1, true, true, false},
    {"Y", 1, true, true, false},
    {"Z", 1, true, true, false},
    {"SQRT_X", 1, true, true, false},
    {"SQRT_X_DAG", 1, true, true, false},
    {"H_XY", 1, true, true, false},
    {"T", 1, true, false, false},
    {"T_DAG", 1, true, false, false},
    {"G_X", 1, true, false, false},
    {"G_X_DAG", 1, true, false, false},
    {"G_Y", 1, true, false, false},
    {"G_Y_DAG", 1, true, false, false},
    {"CX", 2, true, true, false},
    {"CY", 2, true, true, false},
    {"CZ", 2, true, true, false},
    {"SWAP", 2, true, true, false},
    {"CSX", 2, true, false, false},
    {"CSX_DAG", 2, true, false, false},
    {"CCZ", 3, true, false, false},
    {"DEPOLARIZE1", 1, false, true, true},
    {"DEPOLARIZE2", 2, false, true, true},
    {"DEPOLARIZE3", 3, false, true, true},
    {"X_ERROR", 1, false, true, true},
    {"DETECTOR", 0, false, true, false},
    {"OBSERVABLE_INCLUDE", 0, false, true, true},
    {"POSTSELECT", 0, false, true, false},
    {"STAGE", 0, false, true, false},
    {"LOGICAL_FRAME", 0, false, true, true},
}};

}  // namespace

const OpInfo &op_info(Op op) { return kOpTable[size_t(op)]; }

Op op_from_name(std::string_view name, bool &nonlocal) {
    nonlocal = false;
    if (!name.empty() && name.back() == '*') {
        nonlocal = true;
        name.remove_suffix(1);
    }
    for (size_t i = 0; i < kOpTable.size(); i++)
        if (kOpTable[i].name == name) return Op(i);
    fail("unknown mnemonic '" + std::string(name) + "'");
}

Target Target::pauli(char letter, u32 q) {
    switch (letter) {
        case 'X': return {PauliX, q};
        case 'Y': return {PauliY, q};
        case 'Z': return {PauliZ, q};
    }
    fail("bad Pauli target letter");
}

bool Instruction::is_annotation() const {
    switch (op) {
        case Op::DETECTOR: case Op::OBSERVABLE_INCLUDE: case Op::POSTSELECT:
        case Op::STAGE: case Op::LOGICAL_FRAME:
            return true;
        default:
            return false;
    }
}

size_t Circuit::num_measurements() const {
    size_t c = 0;
    for (const auto &ins : instructions)
        if (ins.op == Op::M) c += ins.targets.size();
    return c;
}

size_t Circuit::num_observables() const {
    size_t hi = 0;
    for (const auto &ins : instructions)
        if (ins.op == Op::OBSERVABLE_INCLUDE || ins.op == Op::LOGICAL_FRAME)
            hi = std::max(hi, size_t(ins.param) + 1);
    return hi;
}

bool Circuit::has_noise() const {
    for (const auto &ins : instructions)
        switch (ins.op) {
            case Op::DEPOLARIZE1: case Op::DEPOLARIZE2: case Op::DEPOLARIZE3:
            case Op::X_ERROR:
                return true;
            default: break;
        }
    return false;
}

void Circuit::validate() const {
    size_t measured = 0;
    for (const auto &ins : instructions) {
        const OpInfo &info = op_info(ins.op);
        if (info.arity > 0 && !ins.is_annotation()) {
            require(ins.targets.size() % size_t(info.arity) == 0,
                    std::string(info.name) + ": target count not a multiple of arity");
            std::set<u32> seen;
            for (size_t i = 0; i < ins.targets.size(); i += info.arity) {
                seen.clear();
                for (int k = 0; k < info.arity; k++) {
                    const Target &t = ins.targets[i + k];
                    require(t.kind == Target::Qubit, "gate target must be a qubit");
                    require(t.value < n_qubits, "qubit index out of range");
                    require(seen.insert(t.value).second,
                            std::string(info.name) + ": repeated qubit in one gate");
                }
            }
        }
        if (ins.op == Op::M) measured += ins.targets.size();
        if (ins.op == Op::DETECTOR || ins.op == Op::POSTSELECT ||
            ins.op == Op::OBSERVABLE_INCLUDE) {
            for (const Target &t : ins.targets) {
                require(t.kind == Target::Rec, "annotation target must be rec[-k]");
                require(t.value >= 1 && t.value <= measured,
                        "rec lookback outside measurement record");
            }
        }
    }
}

void Circuit::append(Instruction ins) { instructions.push_back(std::move(ins)); }

void Circuit::append(Op op, std::initializer_list<u32> qubits, double param) {
    Instruction ins;
    ins.op = op;
    ins.param = param;
    for (u32 q : qubits) ins.targets.push_back(Target::qubit(q));
    instructions.push_back(std::move(ins));
}

Circuit Circuit::operator+(const Circuit &tail) const {
    Circuit out = *this;
    out.n_qubits = std::max(n_qubits, tail.n_qubits);
    out.instructions.insert(out.instructions.end(), tail.instructions.begin(),
                            tail.instructions.end());
    return out;
}

// ---- text format ---------------------------------------------------------

namespace {

std::string format_param(double p) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", p);
    return buf;
}

struct Parser {
    std::string_view text;
    size_t pos = 0;
    int line = 1;

    [[noreturn]] void die(const std::string &msg) const {
        fail("parse error on line " + std::to_string(line) + ": " + msg);
    }
};

}  // namespace

std::string emit_circuit(const Circuit &c) {
    std::ostringstream out;
    for (const auto &ins : c.instructions) {
        const OpInfo &info = op_info(ins.op);
        out << info.name;
        if (ins.nonlocal) out << '*';
        if (ins.op == Op::STAGE || ins.op == Op::POSTSELECT) {
            out << '(' << ins.label;
            if (ins.op == Op::STAGE && ins.stage_width >= 0)
                out << ", width=" << ins.stage_width;
            out << ')';
        } else if (info.has_param) {
            out << '(' << format_param(ins.param) << ')';
        }
        for (const Target &t : ins.targets) {
            out << ' ';
            switch (t.kind) {
                case Target::Qubit: out << t.value; break;
                case Target::Rec: out << "rec[-" << t.value << ']'; break;
                case Target::PauliX: out << 'X' << t.value; break;
                case Target::PauliY: out << 'Y' << t.value; break;
                case Target::PauliZ: out << 'Z' << t.value; break;
            }
        }
        out << '\n';
    }
    return out.str();
}

Circuit parse_circuit(std::string_view text) {
    Circuit c;
    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        line_no++;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        // tokenize
        std::vector<std::string> tokens;
        std::string cur;
        for (char ch : line) {
            if (ch == ' ' || ch == '\t' || ch == '\r') {
                if (!cur.empty()) { tokens.push_back(cur); cur.clear(); }
            } else {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
        if (tokens.empty()) continue;

        auto die = [&](const std::string &msg) -> void {
            fail("parse error on line " + std::to_string(line_no) + ": " + msg);
        };

        std::string head = tokens[0];
        Instruction ins;
        std::string arg;
        if (auto paren = head.find('('); paren != std::string::npos) {
            size_t joined = 1;
            while (head.back() != ')' && joined < tokens.size())
                head += " " + tokens[joined++];
            tokens.erase(tokens.begin() + 1, tokens.begin() + long(joined));
            if (head.back() != ')') die("missing ')'");
            arg = head.substr(paren + 1, head.size() - paren - 2);
            head = head.substr(0, paren);
        }
        try {
            ins.op = op_from_name(head, ins.nonlocal);
        } catch (const Error &e) {
            die(e.what());
        }
        const OpInfo &info = op_info(ins.op);
        if (ins.op == Op::STAGE || ins.op == Op::POSTSELECT) {
            if (arg.empty()) die(std::string(info.name) + " needs a (name)");
            if (auto comma = arg.find(','); comma != std::string::npos) {
                std::string rest = arg.substr(comma + 1);
                ins.label = arg.substr(0, comma);
                size_t ws = rest.find_first_not_of(' ');
                rest = ws == std::string::npos ? "" : rest.substr(ws);
                if (rest.rfind("width=", 0) != 0) die("bad STAGE option '" + rest + "'");
                ins.stage_width = std::stoi(rest.substr(6));
            } else {
                ins.label = arg;
            }
        } else if (info.has_param) {
            if (arg.empty()) die(std::string(info.name) + " needs a parameter");
            char *endp = nullptr;
            ins.param = std::strtod(arg.c_str(), &endp);
            if (endp != arg.c_str() + arg.size()) die("malformed parameter '" + arg + "'");
            if (info.name.substr(0, 5) == "DEPOL" || ins.op == Op::X_ERROR) {
                if (!(ins.param >= 0 && ins.param <= 1)) die("probability out of range");
            }
        } else if (!arg.empty()) {
            die(std::string(info.name) + " takes no parameter");
        }
        for (size_t i = 1; i < tokens.size(); i++) {
            const std::string &tok = tokens[i];
            if (tok.rfind("rec[-", 0) == 0 && tok.back() == ']') {
                int k = 0;
                try {
                    k = std::stoi(tok.substr(5, tok.size() - 6));
                } catch (...) { die("bad lookback '" + tok + "'"); }
                if (k <= 0) die("bad lookback '" + tok + "'");
                ins.targets.push_back(Target::rec(u32(k)));
            } else if (ins.op == Op::LOGICAL_FRAME &&
                       (tok[0] == 'X' || tok[0] == 'Y' || tok[0] == 'Z')) {
                u32 q = 0;
                auto res = std::from_chars(tok.data() + 1, tok.data() + tok.size(), q);
                if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
                    die("bad Pauli target '" + tok + "'");
                ins.targets.push_back(Target::pauli(tok[0], q));
            } else {
                u32 q = 0;
                auto res = std::from_chars(tok.data(), tok.data() + tok.size(), q);
                if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
                    die("bad target '" + tok + "'");
                ins.targets.push_back(Target::qubit(q));
                c.n_qubits = std::max(c.n_qubits, size_t(q) + 1);
            }
        }
        c.instructions.push_back(std::move(ins));
    }
    try {
        c.validate();
    } catch (const Error &e) {
        fail(std::string("invalid circuit: ") + e.what());
    }
    return c;
}

// ---- resource accounting --------------------------------------------------

const StageStats *ResourceStats::stage(const std::string &name) const {
    for (const auto &s : stages)
        if (s.name == name) return &s;
    return nullptr;
}

ResourceStats circuit_stats(const Circuit &c) {
    ResourceStats rs;
    std::map<std::string, size_t> index;
    std::string current = "";
    std::map<std::string, std::set<u32>> touched;
    std::map<std::string, std::set<size_t>> layers;
    std::map<std::string, int> width_override;
    std::set<size_t> occupied;
    size_t tick = 0;

    auto stage_slot = [&](const std::string &name) -> size_t {
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        index[name] = rs.stages.size();
        rs.stages.push_back({name, 0, 0});
        return rs.stages.size() - 1;
    };

    for (const auto &ins : c.instructions) {
        if (ins.op == Op::TICK) { tick++; continue; }
        if (ins.op == Op::STAGE) {
            current = ins.label;
            stage_slot(current);
            if (ins.stage_width >= 0) width_override[current] = ins.stage_width;
            continue;
        }
        if (ins.is_annotation()) continue;
        const OpInfo &info = op_info(ins.op);
        bool is_noise = info.has_param;
        if (!is_noise) {
            stage_slot(current);
            for (const Target &t : ins.targets)
                if (t.kind == Target::Qubit) touched[current].insert(t.value);
            layers[current].insert(tick);
            occupied.insert(tick);
        }
        // gate histogram over the whole circuit
        if (ins.op == Op::R) rs.hist.init += ins.targets.size();
        else if (ins.op == Op::M) rs.hist.measure += ins.targets.size();
        else if (info.is_gate) {
            size_t apps = ins.targets.size() / size_t(info.arity);
            if (info.arity == 1) rs.hist.q1 += apps;
            else if (info.arity == 2) (ins.nonlocal ? rs.hist.q2_nonlocal : rs.hist.q2_local) += apps;
            else rs.hist.q3 += apps;
        }
    }
    rs.total_depth = occupied.size();
    for (auto &s : rs.stages) {
        auto ov = width_override.find(s.name);
        s.qubits = ov != width_override.end() ? size_t(ov->second) : touched[s.name].size();
        s.depth = layers[s.name].size();
    }
    // drop the anonymous stage if it never saw an instruction
    std::erase_if(rs.stages, [](const StageStats &s) {
        return s.name.empty() && s.qubits == 0 && s.depth == 0;
    });
    return rs;
}

}  // namespace cultiv
