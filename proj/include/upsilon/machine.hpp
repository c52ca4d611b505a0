#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "upsilon/dyadic.hpp"
#include "upsilon/environment.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/history.hpp"
#include "upsilon/rng.hpp"
#include "upsilon/schedule.hpp"

namespace upsilon {

// An 8-symbol tape machine whose programs define stochastic environments.
// Programs are prefix-free coded: Elias gamma of (opcode count + 1), then 3
// bits per opcode. The +1 makes the empty program codable.

enum class Opcode : std::uint8_t {
    Left = 0,
    Right = 1,
    Inc = 2,
    Dec = 3,
    LoopStart = 4,
    LoopEnd = 5,
    Read = 6,
    Write = 7,
};

inline constexpr unsigned kOpcodeCount = 8;
inline constexpr unsigned kBitsPerOpcode = 3;
inline constexpr char kMachineVersion[] = "rm8-1";

inline char opcode_char(Opcode op) {
    static constexpr char chars[] = {'<', '>', '+', '-', '[', ']', ',', '.'};
    return chars[static_cast<unsigned>(op)];
}

struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

// MSB-first bit buffer.
class BitString {
public:
    void push(bool bit) {
        if (size_ % 8 == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (size_ % 8));
        ++size_;
    }

    bool get(std::size_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1; }

    std::size_t size() const { return size_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    static BitString from_bytes(std::vector<std::uint8_t> bytes, std::size_t bit_count) {
        BitString b;
        b.bytes_ = std::move(bytes);
        b.size_ = bit_count;
        return b;
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t size_ = 0;
};

inline unsigned bit_width(std::uint64_t v) {
    unsigned w = 0;
    while (v > 0) {
        ++w;
        v >>= 1;
    }
    return w;
}

// Elias gamma: bit_width(v)-1 zeros, then v's binary digits. Defined for v >= 1.
inline void gamma_append(BitString& out, std::uint64_t v) {
    const unsigned w = bit_width(v);
    for (unsigned i = 0; i + 1 < w; ++i) out.push(false);
    for (unsigned i = w; i-- > 0;) out.push((v >> i) & 1);
}

inline unsigned gamma_length(std::uint64_t v) { return 2 * bit_width(v) - 1; }

struct Program {
    std::vector<Opcode> ops;

    std::size_t opcode_count() const { return ops.size(); }

    // l(p) in bits under the prefix-free code.
    std::size_t length_bits() const {
        return gamma_length(ops.size() + 1) + kBitsPerOpcode * ops.size();
    }

    bool operator==(const Program& o) const { return ops == o.ops; }

    std::string mnemonic() const {
        std::string s;
        s.reserve(ops.size());
        for (Opcode op : ops) s.push_back(opcode_char(op));
        return s;
    }
};

inline std::size_t program_length_bits(std::size_t opcode_count) {
    return gamma_length(opcode_count + 1) + kBitsPerOpcode * opcode_count;
}

inline BitString encode_program(const Program& p) {
    BitString bits;
    gamma_append(bits, p.ops.size() + 1);
    for (Opcode op : p.ops) {
        const unsigned code = static_cast<unsigned>(op);
        bits.push((code >> 2) & 1);
        bits.push((code >> 1) & 1);
        bits.push(code & 1);
    }
    return bits;
}

struct DecodedProgram {
    Program program;
    std::size_t bits_consumed = 0;
};

// Decodes exactly one codeword starting at bit `offset`. Throws DecodeError
// on a truncated stream. An opcode count of zero (the empty program) is legal.
inline DecodedProgram decode_program(const BitString& bits, std::size_t offset = 0) {
    std::size_t pos = offset;
    unsigned zeros = 0;
    for (;;) {
        if (pos >= bits.size()) throw DecodeError("truncated stream in gamma prefix");
        if (bits.get(pos)) break;
        ++zeros;
        ++pos;
    }
    std::uint64_t value = 0;
    for (unsigned i = 0; i <= zeros; ++i) {
        if (pos >= bits.size()) throw DecodeError("truncated stream in gamma value");
        value = (value << 1) | static_cast<std::uint64_t>(bits.get(pos));
        ++pos;
    }
    const std::uint64_t opcount = value - 1;
    DecodedProgram result;
    result.program.ops.reserve(opcount);
    for (std::uint64_t i = 0; i < opcount; ++i) {
        unsigned code = 0;
        for (unsigned b = 0; b < kBitsPerOpcode; ++b) {
            if (pos >= bits.size()) throw DecodeError("truncated stream in opcodes");
            code = (code << 1) | static_cast<unsigned>(bits.get(pos));
            ++pos;
        }
        result.program.ops.push_back(static_cast<Opcode>(code));
    }
    result.bits_consumed = pos - offset;
    return result;
}

// --- execution ---------------------------------------------------------------

inline constexpr std::uint64_t kDefaultStepLimit = 4096;

struct CycleResult {
    Observation observation = 0;    // first output byte mod |O|
    unsigned raw_reward_byte = 0;   // second output byte; raw reward is byte/255
    bool produced_percept = false;  // false -> default percept (0, 0)
    std::uint64_t steps_used = 0;
};

namespace detail {

// Bracket matching, resolved once per program. For LoopStart the target is
// the index just past the matching LoopEnd (end of program when unmatched);
// an unmatched LoopEnd is a no-op.
inline std::vector<std::uint32_t> loop_targets(const Program& p) {
    const std::size_t n = p.ops.size();
    std::vector<std::uint32_t> target(n, 0);
    std::vector<std::uint32_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.ops[i] == Opcode::LoopStart) {
            stack.push_back(static_cast<std::uint32_t>(i));
            target[i] = static_cast<std::uint32_t>(n);  // unmatched: jump to end
        } else if (p.ops[i] == Opcode::LoopEnd) {
            if (stack.empty()) {
                target[i] = static_cast<std::uint32_t>(i) + 1;  // unmatched: no-op
            } else {
                const std::uint32_t open = stack.back();
                stack.pop_back();
                target[open] = static_cast<std::uint32_t>(i) + 1;
                target[i] = open + 1;
            }
        }
    }
    return target;
}

}  // namespace detail

// The tape, head, queues and step budget of one cycle's run.
class MachineState {
public:
    explicit MachineState(const std::vector<std::uint8_t>& input, Rng& rng)
        : input_(input), rng_(rng) {
        right_.resize(16, 0);
    }

    std::uint8_t& cell() {
        if (head_ >= 0) {
            const std::size_t i = static_cast<std::size_t>(head_);
            if (i >= right_.size()) right_.resize(i + 1, 0);
            return right_[i];
        }
        const std::size_t i = static_cast<std::size_t>(-1 - head_);
        if (i >= left_.size()) left_.resize(i + 1, 0);
        return left_[i];
    }

    void move(int delta) { head_ += delta; }

    // History bytes first, then unlimited fresh random bytes: this is how
    // programs realize stochastic environments.
    std::uint8_t read_input() {
        if (input_pos_ < input_.size()) return input_[input_pos_++];
        return rng_.next_byte();
    }

    void write_output(std::uint8_t byte) {
        if (output_count_ < 2) first_outputs_[output_count_] = byte;
        ++output_count_;
    }

    std::size_t output_count() const { return output_count_; }
    std::uint8_t output(std::size_t i) const { return first_outputs_[i]; }

private:
    const std::vector<std::uint8_t>& input_;
    Rng& rng_;
    std::vector<std::uint8_t> right_;
    std::vector<std::uint8_t> left_;
    std::int64_t head_ = 0;
    std::size_t input_pos_ = 0;
    std::uint8_t first_outputs_[2] = {0, 0};
    std::size_t output_count_ = 0;
};

// Runs one percept computation: fresh machine, input = encoded history bytes
// followed by random bytes. Every syntactically valid program yields a
// percept: timeouts and underproduction map to the default percept (0, 0).
inline CycleResult execute_cycle_bytes(const Program& p,
                                       const std::vector<std::uint32_t>& targets,
                                       const std::vector<std::uint8_t>& input_bytes, Rng& rng,
                                       std::uint64_t step_limit, std::uint32_t observation_count) {
    MachineState m(input_bytes, rng);
    const std::size_t n = p.ops.size();
    std::size_t pc = 0;
    std::uint64_t steps = 0;
    while (pc < n && steps < step_limit) {
        ++steps;
        switch (p.ops[pc]) {
            case Opcode::Left:
                m.move(-1);
                ++pc;
                break;
            case Opcode::Right:
                m.move(+1);
                ++pc;
                break;
            case Opcode::Inc:
                ++m.cell();
                ++pc;
                break;
            case Opcode::Dec:
                --m.cell();
                ++pc;
                break;
            case Opcode::LoopStart:
                pc = m.cell() == 0 ? targets[pc] : pc + 1;
                break;
            case Opcode::LoopEnd:
                pc = m.cell() != 0 ? targets[pc] : pc + 1;
                break;
            case Opcode::Read:
                m.cell() = m.read_input();
                ++pc;
                break;
            case Opcode::Write:
                m.write_output(m.cell());
                ++pc;
                break;
        }
    }
    CycleResult r;
    r.steps_used = steps;
    if (m.output_count() >= 2) {
        r.produced_percept = true;
        r.observation = m.output(0) % observation_count;
        r.raw_reward_byte = m.output(1);
    }
    return r;
}

inline CycleResult execute_cycle(const Program& p, const History& history, Rng& rng,
                                 std::uint64_t step_limit, std::uint32_t observation_count) {
    const auto targets = detail::loop_targets(p);
    const auto input = encode_history_bytes(history);
    return execute_cycle_bytes(p, targets, input, rng, step_limit, observation_count);
}

// --- complexity ----------------------------------------------------------------

struct ComplexityScore {
    std::size_t length_bits = 0;
    std::size_t kt_bits = 0;  // length + ceil(log2(1 + total steps used))
};

inline ComplexityScore complexity(const Program& p, std::uint64_t steps_used) {
    ComplexityScore score;
    score.length_bits = p.length_bits();
    std::uint64_t budget = steps_used;  // ceil(log2(1 + steps)) = bits to count `steps` values
    unsigned log_term = 0;
    while ((1ULL << log_term) < budget + 1) ++log_term;
    score.kt_bits = score.length_bits + log_term;
    return score;
}

// --- the environment a program defines -----------------------------------------

// Percept at cycle k comes from running the program on the encoded history so
// far; the raw byte reward is bounded by the schedule. The running encoding
// is kept incrementally, matching encode_history_bytes byte for byte.
class ProgramEnvironment final : public Environment {
public:
    ProgramEnvironment(Program program, Spaces spaces, BoundingSchedule schedule,
                       std::uint64_t step_limit = kDefaultStepLimit)
        : program_(std::move(program)),
          targets_(detail::loop_targets(program_)),
          spaces_(spaces),
          schedule_(std::move(schedule)),
          step_limit_(step_limit) {}

    const Spaces& spaces() const override { return spaces_; }
    const BoundingSchedule& schedule() const override { return schedule_; }
    std::string id() const override;

    const Program& program() const { return program_; }
    std::uint64_t total_steps_used() const { return total_steps_; }

    void reset(Rng rng) override {
        rng_ = rng;
        cycle_ = 0;
        total_steps_ = 0;
        encoded_.assign(2, 0);
    }

    Percept step(std::optional<Action> prev_action) override {
        if (cycle_ > 0) {
            if (cycle_ > kMaxEncodableCycles)
                throw std::length_error("program environment: history exceeds 65535 cycles");
            encoded_[0] = static_cast<std::uint8_t>(cycle_ >> 8);
            encoded_[1] = static_cast<std::uint8_t>(cycle_ & 0xff);
            encoded_.push_back(static_cast<std::uint8_t>(last_percept_.observation & 0xff));
            encoded_.push_back(last_percept_.reward.to_byte_256());
            encoded_.push_back(static_cast<std::uint8_t>(prev_action.value_or(0) & 0xff));
        }
        ++cycle_;
        CycleResult r = execute_cycle_bytes(program_, targets_, encoded_, rng_, step_limit_,
                                            spaces_.observations.size);
        total_steps_ += r.steps_used;
        Percept p;
        if (r.produced_percept) {
            p.observation = r.observation;
            p.reward = schedule_.apply(Rat(r.raw_reward_byte, 255), cycle_);
        }
        last_percept_ = p;
        return p;
    }

private:
    Program program_;
    std::vector<std::uint32_t> targets_;
    Spaces spaces_;
    BoundingSchedule schedule_;
    std::uint64_t step_limit_;
    Rng rng_;
    std::size_t cycle_ = 0;
    std::uint64_t total_steps_ = 0;
    Percept last_percept_;
    std::vector<std::uint8_t> encoded_ = {0, 0};
};

// --- enumeration and sampling ---------------------------------------------------

inline BigInt enumeration_count(std::size_t max_opcount) {
    BigInt total = 0;
    BigInt pow = 1;
    for (std::size_t n = 0; n <= max_opcount; ++n) {
        total += pow;
        pow *= kOpcodeCount;
    }
    return total;
}

// All programs with at most max_opcount opcodes in (length, lexicographic)
// order. Exact and exhaustive, so it is capped to keep memory sane.
inline std::vector<Program> enumerate_programs(std::size_t max_opcount) {
    const BigInt count = enumeration_count(max_opcount);
    if (count > 20'000'000)
        throw UsageError("enumeration of " + count.str() + " programs is too large");
    std::vector<Program> out;
    out.reserve(count.convert_to<std::size_t>());
    for (std::size_t n = 0; n <= max_opcount; ++n) {
        std::vector<Opcode> ops(n, Opcode::Left);
        for (;;) {
            out.push_back(Program{ops});
            // odometer increment in lexicographic opcode order
            std::size_t i = n;
            while (i > 0) {
                --i;
                const unsigned v = static_cast<unsigned>(ops[i]) + 1;
                if (v < kOpcodeCount) {
                    ops[i] = static_cast<Opcode>(v);
                    break;
                }
                ops[i] = Opcode::Left;
                if (i == 0) goto next_length;
            }
            if (n == 0) break;
        }
    next_length:;
    }
    return out;
}

// Distribution over opcode counts for sampled program sets. The default is
// geometric with mean 8 truncated at 64. Probabilities are exact so sampled
// reports can carry exact importance weights.
class LengthDistribution {
public:
    static LengthDistribution geometric_truncated(const Rat& q, std::size_t max_len) {
        LengthDistribution d;
        d.max_len_ = max_len;
        d.thresholds_.reserve(max_len + 1);
        // P(n) proportional to q^n for n = 0..max_len
        Rat power = 1;
        for (std::size_t n = 0; n <= max_len; ++n) {
            d.thresholds_.push_back(power);
            power *= q;
        }
        Rat total = 0;
        for (const Rat& t : d.thresholds_) total += t;
        d.total_ = total;
        return d;
    }

    // mean 8: q = 8/9
    static LengthDistribution default_distribution() {
        return geometric_truncated(Rat(8, 9), 64);
    }

    std::size_t max_length() const { return max_len_; }

    Rat probability(std::size_t n) const {
        if (n > max_len_) return Rat(0);
        return thresholds_[n] / total_;
    }

    Rat mean() const {
        Rat m = 0;
        for (std::size_t n = 0; n <= max_len_; ++n) m += Rat(BigInt(n)) * thresholds_[n];
        return m / total_;
    }

    std::size_t sample(Rng& rng) const {
        // exact draw below the common denominator of the unnormalized weights
        BigInt denom = 1;
        for (const Rat& t : thresholds_) denom = lcm(denom, denominator(t));
        BigInt range = 0;
        for (const Rat& t : thresholds_) range += numerator(t) * (denom / denominator(t));
        BigInt u = rng.below_big(range);
        for (std::size_t n = 0; n <= max_len_; ++n) {
            const BigInt ticks = numerator(thresholds_[n]) * (denom / denominator(thresholds_[n]));
            if (u < ticks) return n;
            u -= ticks;
        }
        throw InternalError("length distribution sampling fell through");
    }

private:
    std::size_t max_len_ = 0;
    std::vector<Rat> thresholds_;  // unnormalized weights per length
    Rat total_ = 1;
};

inline std::vector<Program> sample_programs(std::size_t count, const LengthDistribution& lengths,
                                            Rng& rng) {
    std::vector<Program> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = lengths.sample(rng);
        Program p;
        p.ops.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            p.ops.push_back(static_cast<Opcode>(rng.below(kOpcodeCount)));
        out.push_back(std::move(p));
    }
    return out;
}

// --- corpus files ----------------------------------------------------------------
//
// One program per line: the hex encoding of the bit codeword, zero-padded to
// a byte boundary. Padding bits are not part of l(p). '#' starts a comment.

inline std::string program_to_hex(const Program& p) {
    const BitString bits = encode_program(p);
    static constexpr char digits[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(bits.bytes().size() * 2);
    for (std::uint8_t byte : bits.bytes()) {
        hex.push_back(digits[byte >> 4]);
        hex.push_back(digits[byte & 0xf]);
    }
    return hex;
}

inline std::string ProgramEnvironment::id() const { return "prog:" + program_to_hex(program_); }

inline Program program_from_hex(const std::string& hex) {
    if (hex.empty() || hex.size() % 2 != 0)
        throw DecodeError("hex codeword must have even nonzero length");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(hex.size() / 2);
    auto nibble = [](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a') + 10;
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A') + 10;
        throw DecodeError(std::string("bad hex digit '") + c + "'");
    };
    for (std::size_t i = 0; i < hex.size(); i += 2)
        bytes.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
    const BitString bits = BitString::from_bytes(std::move(bytes), hex.size() * 4);
    DecodedProgram decoded = decode_program(bits);
    if ((decoded.bits_consumed + 7) / 8 * 8 != bits.size())
        throw DecodeError("codeword has extra bytes beyond the program");
    for (std::size_t i = decoded.bits_consumed; i < bits.size(); ++i)
        if (bits.get(i)) throw DecodeError("nonzero padding bits after the codeword");
    return std::move(decoded.program);
}

inline void write_corpus(std::ostream& out, const std::vector<Program>& programs,
                         const std::string& header_comment) {
    out << "# " << header_comment << "\n";
    out << "# machine: " << kMachineVersion << "\n";
    for (const Program& p : programs) out << program_to_hex(p) << "\n";
}

inline void write_corpus(std::ostream& out, const std::vector<Program>& programs,
                         const std::string& header_comment, const std::string& version,
                         const std::string& config_hash) {
    out << "# upsilon " << version << " (config " << config_hash << ")\n";
    write_corpus(out, programs, header_comment);
}

inline std::vector<Program> parse_corpus(std::istream& in, const std::string& name) {
    std::vector<Program> programs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t");
        std::string token = line.substr(start, end - start + 1);
        if (token[0] == '#') continue;
        try {
            programs.push_back(program_from_hex(token));
        } catch (const DecodeError& e) {
            throw IoError(name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return programs;
}

}  // namespace upsilon
