#include "sopt/isa.hpp"
#include "sopt/util.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace sopt {

namespace {

const std::vector<OperandKind> kSigRR{OperandKind::RegDst, OperandKind::RegSrc};
const std::vector<OperandKind> kSigRI{OperandKind::RegDst, OperandKind::Imm};
const std::vector<OperandKind> kSigR{OperandKind::RegDst};
const std::vector<OperandKind> kSigNone{};

struct SemInfo {
    const char* mnemonic;
    const std::vector<OperandKind>* sig;
    uint32_t latency;
};

SemInfo sem_info(Semantics s) {
    switch (s) {
        case Semantics::Unused:  return {"unused", &kSigNone, 0};
        case Semantics::MovR:    return {"mov", &kSigRR, 1};
        case Semantics::MovI:    return {"mov", &kSigRI, 1};
        case Semantics::AddR:    return {"add", &kSigRR, 1};
        case Semantics::AddI:    return {"add", &kSigRI, 1};
        case Semantics::SubR:    return {"sub", &kSigRR, 1};
        case Semantics::SubI:    return {"sub", &kSigRI, 1};
        case Semantics::AndR:    return {"and", &kSigRR, 1};
        case Semantics::AndI:    return {"and", &kSigRI, 1};
        case Semantics::OrR:     return {"or", &kSigRR, 1};
        case Semantics::OrI:     return {"or", &kSigRI, 1};
        case Semantics::XorR:    return {"xor", &kSigRR, 1};
        case Semantics::XorI:    return {"xor", &kSigRI, 1};
        case Semantics::ShlR:    return {"shl", &kSigRR, 1};
        case Semantics::ShlI:    return {"shl", &kSigRI, 1};
        case Semantics::ShrR:    return {"shr", &kSigRR, 1};
        case Semantics::ShrI:    return {"shr", &kSigRI, 1};
        case Semantics::SarR:    return {"sar", &kSigRR, 1};
        case Semantics::SarI:    return {"sar", &kSigRI, 1};
        case Semantics::MulR:    return {"mul", &kSigRR, 3};
        case Semantics::MulI:    return {"mul", &kSigRI, 3};
        case Semantics::MulHiR:  return {"mulhi", &kSigRR, 3};
        case Semantics::MinR:    return {"min", &kSigRR, 3};
        case Semantics::MinI:    return {"min", &kSigRI, 3};
        case Semantics::MaxR:    return {"max", &kSigRR, 3};
        case Semantics::MaxI:    return {"max", &kSigRI, 3};
        case Semantics::CmovzR:  return {"cmovz", &kSigRR, 3};
        case Semantics::CmovnzR: return {"cmovnz", &kSigRR, 3};
        case Semantics::PopcntR: return {"popcnt", &kSigRR, 3};
        case Semantics::Not:     return {"not", &kSigR, 1};
        case Semantics::Neg:     return {"neg", &kSigR, 1};
        case Semantics::Inc:     return {"inc", &kSigR, 1};
        case Semantics::Dec:     return {"dec", &kSigR, 1};
        case Semantics::BitRev:  return {"rev", &kSigR, 3};
    }
    return {"unused", &kSigNone, 0};
}

OpcodeInfo make_op(Semantics s) {
    SemInfo i = sem_info(s);
    return OpcodeInfo{i.mnemonic, *i.sig, i.latency, s};
}

uint32_t bit_reverse32(uint32_t v) {
    v = ((v >> 1) & 0x55555555u) | ((v & 0x55555555u) << 1);
    v = ((v >> 2) & 0x33333333u) | ((v & 0x33333333u) << 2);
    v = ((v >> 4) & 0x0F0F0F0Fu) | ((v & 0x0F0F0F0Fu) << 4);
    v = ((v >> 8) & 0x00FF00FFu) | ((v & 0x00FF00FFu) << 8);
    return (v >> 16) | (v << 16);
}

} // namespace

Isa::Isa(std::vector<OpcodeInfo> table, uint32_t num_regs, uint32_t num_slots,
         std::vector<uint32_t> imm_pool, bool strict_shifts)
    : table_(std::move(table)),
      num_regs_(num_regs),
      num_slots_(num_slots),
      imm_pool_(std::move(imm_pool)),
      strict_shifts_(strict_shifts) {
    if (table_.empty() || table_.back().sem != Semantics::Unused)
        throw std::invalid_argument("opcode table must end with UNUSED");
    if (num_regs_ == 0 || num_regs_ > kMaxRegs)
        throw std::invalid_argument("register count out of range");
    if (num_slots_ == 0 || num_slots_ > kMaxSlots)
        throw std::invalid_argument("slot count out of range");
    if (imm_pool_.empty()) throw std::invalid_argument("immediate pool empty");
    for (size_t i = 0; i + 1 < table_.size(); ++i) {
        if (table_[i].latency < 1)
            throw std::invalid_argument("latency must be >= 1 for " + table_[i].mnemonic);
        if (table_[i].signature.size() > 2)
            throw std::invalid_argument("arity above 2 for " + table_[i].mnemonic);
    }
    sig_class_of_.resize(table_.size());
    for (size_t i = 0; i + 1 < table_.size(); ++i) {
        for (size_t j = 0; j + 1 < table_.size(); ++j) {
            if (table_[i].signature == table_[j].signature)
                sig_class_of_[i].push_back(static_cast<uint16_t>(j));
        }
    }
}

const std::vector<uint16_t>& Isa::signature_class(uint16_t opcode) const {
    return sig_class_of_[opcode];
}

std::optional<uint16_t> Isa::lookup(std::string_view mnemonic,
                                    std::span<const OperandKind> shapes) const {
    for (size_t i = 0; i < table_.size(); ++i) {
        const OpcodeInfo& info = table_[i];
        if (info.mnemonic != mnemonic) continue;
        if (info.signature.size() != shapes.size()) continue;
        bool ok = true;
        for (size_t k = 0; k < shapes.size(); ++k) {
            bool want_imm = info.signature[k] == OperandKind::Imm;
            bool got_imm = shapes[k] == OperandKind::Imm;
            if (want_imm != got_imm) { ok = false; break; }
        }
        if (ok) return static_cast<uint16_t>(i);
    }
    return std::nullopt;
}

Isa Isa::with_strict_shifts(bool strict) const {
    return Isa(table_, num_regs_, num_slots_, imm_pool_, strict);
}

const Isa& default_isa() {
    static const Isa isa = [] {
        std::vector<Semantics> sems = {
            Semantics::MovR, Semantics::MovI,
            Semantics::AddR, Semantics::AddI,
            Semantics::SubR, Semantics::SubI,
            Semantics::AndR, Semantics::AndI,
            Semantics::OrR, Semantics::OrI,
            Semantics::XorR, Semantics::XorI,
            Semantics::ShlR, Semantics::ShlI,
            Semantics::ShrR, Semantics::ShrI,
            Semantics::SarR, Semantics::SarI,
            Semantics::MulR, Semantics::MulI,
            Semantics::MulHiR,
            Semantics::MinR, Semantics::MinI,
            Semantics::MaxR, Semantics::MaxI,
            Semantics::CmovzR, Semantics::CmovnzR,
            Semantics::PopcntR,
            Semantics::Not, Semantics::Neg, Semantics::Inc, Semantics::Dec,
            Semantics::BitRev,
        };
        std::vector<uint32_t> pool = {
            0, 1, 2, 3, 4, 7, 8, 15, 16, 24, 31,
            0xFFu, 0xFFFFu, 0x55555555u, 0x0F0F0F0Fu, 0xFFFFFFFFu,
        };
        return make_isa(sems, 8, 12, std::move(pool));
    }();
    return isa;
}

Isa make_isa(const std::vector<Semantics>& ops, uint32_t num_regs, uint32_t num_slots,
             std::vector<uint32_t> imm_pool) {
    std::vector<OpcodeInfo> table;
    table.reserve(ops.size() + 1);
    for (Semantics s : ops) {
        if (s == Semantics::Unused) throw std::invalid_argument("UNUSED is appended automatically");
        table.push_back(make_op(s));
    }
    table.push_back(make_op(Semantics::Unused));
    return Isa(std::move(table), num_regs, num_slots, std::move(imm_pool));
}

uint32_t live_length(const Isa& isa, const Program& p) {
    uint32_t n = 0;
    for (uint32_t i = 0; i < isa.num_slots(); ++i)
        if (!isa.is_unused(p.slots[i])) ++n;
    return n;
}

bool valid_instruction(const Isa& isa, const Instruction& ins) {
    if (ins.opcode >= isa.vocab_size()) return false;
    const OpcodeInfo& info = isa.op(ins.opcode);
    for (size_t k = 0; k < info.signature.size(); ++k) {
        if (info.signature[k] != OperandKind::Imm && ins.ops[k] >= isa.num_regs())
            return false;
    }
    // Unfilled operand slots stay zero so Program equality is structural.
    for (size_t k = info.signature.size(); k < 2; ++k)
        if (ins.ops[k] != 0) return false;
    return true;
}

bool valid_program(const Isa& isa, const Program& p) {
    for (uint32_t i = 0; i < isa.num_slots(); ++i)
        if (!valid_instruction(isa, p.slots[i])) return false;
    for (uint32_t i = isa.num_slots(); i < kMaxSlots; ++i)
        if (p.slots[i] != Instruction{isa.unused_opcode(), {0, 0}}) return false;
    return true;
}

Program empty_program(const Isa& isa) {
    Program p;
    for (auto& s : p.slots) s = Instruction{isa.unused_opcode(), {0, 0}};
    return p;
}

ExecResult execute(const Isa& isa, const Program& p, const MachineState& input) {
    ExecResult res{input, -1};
    auto& regs = res.state.regs;
    for (uint32_t i = 0; i < isa.num_slots(); ++i) {
        const Instruction& ins = p.slots[i];
        const OpcodeInfo& info = isa.op(ins.opcode);
        uint32_t a = ins.ops[0];
        uint32_t b = ins.ops[1];
        auto src = [&](uint32_t k) { return regs[k]; };
        auto shift_amount = [&](uint32_t raw) -> std::optional<uint32_t> {
            if (isa.strict_shifts() && raw >= 32) return std::nullopt;
            return raw & 31u;
        };
        switch (info.sem) {
            case Semantics::Unused: break;
            case Semantics::MovR: regs[a] = src(b); break;
            case Semantics::MovI: regs[a] = b; break;
            case Semantics::AddR: regs[a] += src(b); break;
            case Semantics::AddI: regs[a] += b; break;
            case Semantics::SubR: regs[a] -= src(b); break;
            case Semantics::SubI: regs[a] -= b; break;
            case Semantics::AndR: regs[a] &= src(b); break;
            case Semantics::AndI: regs[a] &= b; break;
            case Semantics::OrR: regs[a] |= src(b); break;
            case Semantics::OrI: regs[a] |= b; break;
            case Semantics::XorR: regs[a] ^= src(b); break;
            case Semantics::XorI: regs[a] ^= b; break;
            case Semantics::ShlR:
            case Semantics::ShlI: {
                auto amt = shift_amount(info.sem == Semantics::ShlR ? src(b) : b);
                if (!amt) { res.fault_slot = static_cast<int32_t>(i); return res; }
                regs[a] <<= *amt;
                break;
            }
            case Semantics::ShrR:
            case Semantics::ShrI: {
                auto amt = shift_amount(info.sem == Semantics::ShrR ? src(b) : b);
                if (!amt) { res.fault_slot = static_cast<int32_t>(i); return res; }
                regs[a] >>= *amt;
                break;
            }
            case Semantics::SarR:
            case Semantics::SarI: {
                auto amt = shift_amount(info.sem == Semantics::SarR ? src(b) : b);
                if (!amt) { res.fault_slot = static_cast<int32_t>(i); return res; }
                regs[a] = static_cast<uint32_t>(static_cast<int32_t>(regs[a]) >> *amt);
                break;
            }
            case Semantics::MulR: regs[a] *= src(b); break;
            case Semantics::MulI: regs[a] *= b; break;
            case Semantics::MulHiR:
                regs[a] = static_cast<uint32_t>(
                    (static_cast<uint64_t>(regs[a]) * static_cast<uint64_t>(src(b))) >> 32);
                break;
            case Semantics::MinR: regs[a] = std::min(regs[a], src(b)); break;
            case Semantics::MinI: regs[a] = std::min(regs[a], b); break;
            case Semantics::MaxR: regs[a] = std::max(regs[a], src(b)); break;
            case Semantics::MaxI: regs[a] = std::max(regs[a], b); break;
            // Conditional moves test the destination's current value.
            case Semantics::CmovzR: if (regs[a] == 0) regs[a] = src(b); break;
            case Semantics::CmovnzR: if (regs[a] != 0) regs[a] = src(b); break;
            case Semantics::PopcntR: regs[a] = static_cast<uint32_t>(std::popcount(src(b))); break;
            case Semantics::Not: regs[a] = ~regs[a]; break;
            case Semantics::Neg: regs[a] = 0u - regs[a]; break;
            case Semantics::Inc: regs[a] += 1u; break;
            case Semantics::Dec: regs[a] -= 1u; break;
            case Semantics::BitRev: regs[a] = bit_reverse32(regs[a]); break;
        }
    }
    return res;
}

uint32_t perf(const Isa& isa, const Program& p) {
    uint32_t total = 0;
    for (uint32_t i = 0; i < isa.num_slots(); ++i)
        total += isa.op(p.slots[i].opcode).latency;
    return total;
}

namespace {

std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_u32(std::string_view tok, uint32_t& out) {
    if (tok.empty()) return false;
    bool neg = tok.front() == '-';
    if (neg) tok.remove_prefix(1);
    int base = 10;
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
        base = 16;
        tok.remove_prefix(2);
    }
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) return false;
    if (v > 0xFFFFFFFFull) return false;
    out = neg ? (0u - static_cast<uint32_t>(v)) : static_cast<uint32_t>(v);
    return true;
}

} // namespace

Program parse_program(const Isa& isa, std::string_view text) {
    Program prog = empty_program(isa);
    uint32_t slot = 0;
    bool saw_header = false;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line{raw};
        if (size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.substr(0, 6) == ".slots") {
            uint32_t slots = 0, regs = 0;
            if (std::sscanf(std::string(line).c_str(), ".slots %u .regs %u", &slots, &regs) != 2)
                throw ParseError(line_no, "malformed header, expected '.slots N .regs R'");
            if (slots != isa.num_slots() || regs != isa.num_regs())
                throw ParseError(line_no, "header does not match the configured ISA (.slots " +
                                              std::to_string(isa.num_slots()) + " .regs " +
                                              std::to_string(isa.num_regs()) + ")");
            saw_header = true;
            continue;
        }

        size_t sp = line.find(' ');
        std::string mnemonic{line.substr(0, sp)};
        std::vector<std::string_view> toks;
        if (sp != std::string_view::npos) {
            std::string_view rest = trim(line.substr(sp + 1));
            while (!rest.empty()) {
                size_t comma = rest.find(',');
                toks.push_back(trim(rest.substr(0, comma)));
                if (comma == std::string_view::npos) break;
                rest = trim(rest.substr(comma + 1));
            }
        }

        std::vector<OperandKind> shapes;
        std::array<uint32_t, 2> vals{0, 0};
        if (toks.size() > 2) throw ParseError(line_no, "too many operands");
        for (size_t k = 0; k < toks.size(); ++k) {
            std::string_view t = toks[k];
            if (t.empty()) throw ParseError(line_no, "empty operand");
            if (t[0] == 'r' && t.size() > 1 && t[1] >= '0' && t[1] <= '9') {
                uint32_t idx = 0;
                if (!parse_u32(t.substr(1), idx))
                    throw ParseError(line_no, "bad register '" + std::string(t) + "'");
                if (idx >= isa.num_regs())
                    throw ParseError(line_no, "register r" + std::to_string(idx) +
                                                  " out of range (valid: r0..r" +
                                                  std::to_string(isa.num_regs() - 1) + ")");
                shapes.push_back(OperandKind::RegSrc);
                vals[k] = idx;
            } else {
                uint32_t imm = 0;
                if (!parse_u32(t, imm))
                    throw ParseError(line_no, "bad operand '" + std::string(t) + "'");
                shapes.push_back(OperandKind::Imm);
                vals[k] = imm;
            }
        }

        auto opcode = isa.lookup(mnemonic, shapes);
        if (!opcode) {
            // Distinguish unknown mnemonic from arity/kind mismatch for the message.
            bool known = false;
            for (const auto& info : isa.table())
                if (info.mnemonic == mnemonic) { known = true; break; }
            if (!known) throw ParseError(line_no, "unknown mnemonic '" + mnemonic + "'");
            throw ParseError(line_no, "operand count or kinds do not match '" + mnemonic + "'");
        }
        if (isa.op(*opcode).sem == Semantics::Unused) continue;
        if (slot >= isa.num_slots())
            throw ParseError(line_no, "too many instructions (max " +
                                          std::to_string(isa.num_slots()) + ")");
        prog.slots[slot++] = Instruction{*opcode, vals};
    }
    (void)saw_header;  // header optional on input, always emitted on output
    return prog;
}

std::string render_program(const Isa& isa, const Program& p) {
    std::string out = ".slots " + std::to_string(isa.num_slots()) + " .regs " +
                      std::to_string(isa.num_regs()) + "\n";
    for (uint32_t i = 0; i < isa.num_slots(); ++i) {
        const Instruction& ins = p.slots[i];
        if (isa.is_unused(ins)) continue;
        const OpcodeInfo& info = isa.op(ins.opcode);
        out += info.mnemonic;
        for (size_t k = 0; k < info.signature.size(); ++k) {
            out += (k == 0) ? " " : ", ";
            if (info.signature[k] == OperandKind::Imm)
                out += "0x" + fmt_hex_lower(ins.ops[k]);
            else
                out += "r" + std::to_string(ins.ops[k]);
        }
        out += "\n";
    }
    return out;
}

Program compact(const Isa& isa, const Program& p) {
    Program out = empty_program(isa);
    uint32_t j = 0;
    for (uint32_t i = 0; i < isa.num_slots(); ++i)
        if (!isa.is_unused(p.slots[i])) out.slots[j++] = p.slots[i];
    return out;
}

} // namespace sopt
