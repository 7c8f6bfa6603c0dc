#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sopt {

inline constexpr size_t kMaxSlots = 16;
inline constexpr size_t kMaxRegs = 8;

enum class OperandKind : uint8_t {
    RegDst,  // register that is written (and possibly read first)
    RegSrc,  // register that is only read
    Imm,     // 32-bit immediate
};

// Pure transition behaviours. Opcode tables map entries onto these, so a
// reduced vocabulary (used by enumeration tests) reuses the same interpreter.
enum class Semantics : uint8_t {
    Unused,
    MovR, MovI,
    AddR, AddI,
    SubR, SubI,
    AndR, AndI,
    OrR, OrI,
    XorR, XorI,
    ShlR, ShlI,
    ShrR, ShrI,
    SarR, SarI,
    MulR, MulI,
    MulHiR,
    MinR, MinI,
    MaxR, MaxI,
    CmovzR, CmovnzR,
    PopcntR,
    Not, Neg, Inc, Dec, BitRev,
};

struct OpcodeInfo {
    std::string mnemonic;
    std::vector<OperandKind> signature;  // at most 2 entries
    uint32_t latency = 1;
    Semantics sem = Semantics::Unused;
};

struct Instruction {
    uint16_t opcode = 0;
    std::array<uint32_t, 2> ops{0, 0};

    bool operator==(const Instruction&) const = default;
};

// Fixed-capacity slot array; logical length comes from the Isa (l_max).
// UNUSED fills empty slots, so every program is "full length" structurally.
struct Program {
    std::array<Instruction, kMaxSlots> slots{};

    bool operator==(const Program&) const = default;
};

struct MachineState {
    std::array<uint32_t, kMaxRegs> regs{};

    bool operator==(const MachineState&) const = default;
};

struct TestCase {
    MachineState input;
    MachineState expected;
    std::vector<uint8_t> output_mask;  // register indices compared; non-empty
};

struct ExecResult {
    MachineState state;
    int32_t fault_slot = -1;  // >= 0 when a strict-mode instruction faulted

    bool faulted() const { return fault_slot >= 0; }
};

// Instruction-set configuration: the opcode vocabulary (size V, stable order,
// UNUSED last), register count, slot count, and the immediate pool the
// proposal distribution samples from. Immutable after construction.
class Isa {
public:
    Isa(std::vector<OpcodeInfo> table, uint32_t num_regs, uint32_t num_slots,
        std::vector<uint32_t> imm_pool, bool strict_shifts = false);

    uint32_t num_regs() const { return num_regs_; }
    uint32_t num_slots() const { return num_slots_; }
    bool strict_shifts() const { return strict_shifts_; }

    size_t vocab_size() const { return table_.size(); }        // V
    size_t proposable_count() const { return table_.size() - 1; }  // V' (UNUSED excluded)
    uint16_t unused_opcode() const { return static_cast<uint16_t>(table_.size() - 1); }

    const OpcodeInfo& op(uint16_t idx) const { return table_[idx]; }
    const std::vector<OpcodeInfo>& table() const { return table_; }
    const std::vector<uint32_t>& imm_pool() const { return imm_pool_; }

    bool is_unused(const Instruction& ins) const { return ins.opcode == unused_opcode(); }

    // Proposable opcodes sharing this opcode's exact signature (includes itself).
    const std::vector<uint16_t>& signature_class(uint16_t opcode) const;

    std::optional<uint16_t> lookup(std::string_view mnemonic,
                                   std::span<const OperandKind> shapes) const;

    Isa with_strict_shifts(bool strict) const;

private:
    std::vector<OpcodeInfo> table_;
    uint32_t num_regs_;
    uint32_t num_slots_;
    std::vector<uint32_t> imm_pool_;
    bool strict_shifts_;
    std::vector<std::vector<uint16_t>> sig_class_of_;  // per opcode
};

// The default toy ISA: 8 registers, 12 slots, 34 opcodes (33 proposable).
const Isa& default_isa();

// Reduced vocabularies for enumeration-style tests.
Isa make_isa(const std::vector<Semantics>& ops, uint32_t num_regs, uint32_t num_slots,
             std::vector<uint32_t> imm_pool);

uint32_t live_length(const Isa& isa, const Program& p);
bool valid_instruction(const Isa& isa, const Instruction& ins);
bool valid_program(const Isa& isa, const Program& p);
Program empty_program(const Isa& isa);

// Executes all non-UNUSED slots in order; pure. Faults only in strict-shift
// mode on an effective shift amount >= 32.
ExecResult execute(const Isa& isa, const Program& p, const MachineState& input);

// Sum of latencies of live slots.
uint32_t perf(const Isa& isa, const Program& p);

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Assembly-like text format. Header ".slots N .regs R" must match the isa;
// live instructions one per line, '#' comments, UNUSED slots omitted.
// Rendering is canonical: lowercase mnemonics, ", " between operands,
// immediates as 0x-prefixed lowercase hex, live slots compacted in order.
Program parse_program(const Isa& isa, std::string_view text);
std::string render_program(const Isa& isa, const Program& p);

// Live instructions packed to the front (canonical slot placement).
Program compact(const Isa& isa, const Program& p);

} // namespace sopt
