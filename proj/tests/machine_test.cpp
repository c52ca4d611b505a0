#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "upsilon/agent.hpp"
#include "upsilon/episode.hpp"
#include "upsilon/machine.hpp"

using namespace upsilon;

namespace {

Program make_program(std::initializer_list<Opcode> ops) { return Program{std::vector<Opcode>(ops)}; }

std::string bit_string(const BitString& bits) {
    std::string s;
    for (std::size_t i = 0; i < bits.size(); ++i) s.push_back(bits.get(i) ? '1' : '0');
    return s;
}

BitString bits_from_string(const std::string& s) {
    BitString b;
    for (char c : s) b.push(c == '1');
    return b;
}

CycleResult execute(const Program& p, const History& h, std::uint64_t seed = 1,
                    std::uint64_t step_limit = kDefaultStepLimit, std::uint32_t obs = 3) {
    Rng rng(seed);
    return execute_cycle(p, h, rng, step_limit, obs);
}

}  // namespace

TEST(ProgramCode, EmptyProgramIsOneBit) {
    const Program empty;
    EXPECT_EQ(empty.length_bits(), 1u);
    EXPECT_EQ(bit_string(encode_program(empty)), "1");
    const auto decoded = decode_program(bits_from_string("1"));
    EXPECT_EQ(decoded.program, empty);
    EXPECT_EQ(decoded.bits_consumed, 1u);
}

TEST(ProgramCode, SingleOpcodeUsesGammaOfTwo) {
    const Program left = make_program({Opcode::Left});
    EXPECT_EQ(left.length_bits(), 6u);  // gamma(2) = "010" plus 3 opcode bits
    EXPECT_EQ(bit_string(encode_program(left)), "010000");
    const auto decoded = decode_program(bits_from_string("010000"));
    EXPECT_EQ(decoded.program, left);
    EXPECT_EQ(decoded.bits_consumed, 6u);
}

TEST(ProgramCode, TruncatedStreamsError) {
    EXPECT_THROW(decode_program(bits_from_string("0")), DecodeError);      // gamma prefix cut
    EXPECT_THROW(decode_program(bits_from_string("01")), DecodeError);     // gamma value cut
    EXPECT_THROW(decode_program(bits_from_string("01000")), DecodeError);  // opcode bits cut
    EXPECT_THROW(decode_program(bits_from_string("")), DecodeError);
}

TEST(ProgramCode, DecodeConsumesExactlyOneCodeword) {
    // "1" (empty program) followed by junk: one codeword consumed, junk left
    const auto decoded = decode_program(bits_from_string("1000"));
    EXPECT_EQ(decoded.program, Program{});
    EXPECT_EQ(decoded.bits_consumed, 1u);
}

TEST(ProgramCode, RandomStreamRoundTripsConsumedPrefix) {
    Rng rng(31);
    int decoded_count = 0;
    for (int trial = 0; trial < 300; ++trial) {
        BitString bits;
        for (int i = 0; i < 200; ++i) bits.push(rng.below(2) == 1);
        DecodedProgram decoded;
        try {
            decoded = decode_program(bits);
        } catch (const DecodeError&) {
            continue;  // truncated gamma or opcodes; nothing to round-trip
        }
        ++decoded_count;
        const BitString re = encode_program(decoded.program);
        ASSERT_EQ(re.size(), decoded.bits_consumed);
        for (std::size_t i = 0; i < re.size(); ++i) EXPECT_EQ(re.get(i), bits.get(i));
    }
    EXPECT_GT(decoded_count, 100);
}

TEST(ProgramCode, PrefixFreeUpToFourOpcodes) {
    const auto programs = enumerate_programs(4);
    std::vector<std::string> words;
    words.reserve(programs.size());
    for (const auto& p : programs) words.push_back(bit_string(encode_program(p)));
    std::sort(words.begin(), words.end());
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        const auto& a = words[i];
        const auto& b = words[i + 1];
        // after sorting, any prefix relation appears between neighbours
        EXPECT_FALSE(b.size() >= a.size() && b.compare(0, a.size(), a) == 0)
            << a << " is a prefix of " << b;
    }
}

TEST(Enumeration, CountsMatchClosedForm) {
    EXPECT_EQ(enumerate_programs(0).size(), 1u);
    EXPECT_EQ(enumerate_programs(1).size(), 9u);
    EXPECT_EQ(enumerate_programs(3).size(), 585u);
    EXPECT_EQ(enumeration_count(3), BigInt(585));
    EXPECT_EQ(enumeration_count(10), BigInt("1227133513"));
}

TEST(Enumeration, ShortToLongLexicographicOrder) {
    const auto programs = enumerate_programs(2);
    EXPECT_EQ(programs[0], Program{});
    EXPECT_EQ(programs[1], make_program({Opcode::Left}));
    EXPECT_EQ(programs[8], make_program({Opcode::Write}));
    EXPECT_EQ(programs[9], make_program({Opcode::Left, Opcode::Left}));
    EXPECT_EQ(programs.back(), make_program({Opcode::Write, Opcode::Write}));
    for (std::size_t i = 0; i + 1 < programs.size(); ++i)
        EXPECT_LE(programs[i].opcode_count(), programs[i + 1].opcode_count());
}

TEST(Kraft, ExactMassUpToTwelveOpcodes) {
    // closed form over lengths: the 8^n opcode choices cancel the 3n bits
    Rat closed_form = 0;
    for (std::size_t n = 0; n <= 12; ++n)
        closed_form += Rat(1, BigInt(1) << gamma_length(n + 1));
    // oracle: per-length count times per-program weight
    Rat counted = 0;
    BigInt pow = 1;
    for (std::size_t n = 0; n <= 12; ++n) {
        counted += Rat(pow, BigInt(1) << program_length_bits(n));
        pow *= kOpcodeCount;
    }
    EXPECT_EQ(closed_form, counted);
    EXPECT_EQ(closed_form, Rat(59, 64));
    EXPECT_LE(closed_form, Rat(1));
}

TEST(Execute, EmptyProgramGivesDefaultPercept) {
    const CycleResult r = execute(Program{}, {});
    EXPECT_FALSE(r.produced_percept);
    EXPECT_EQ(r.steps_used, 0u);
    EXPECT_EQ(r.observation, 0u);
    EXPECT_EQ(r.raw_reward_byte, 0u);
}

TEST(Execute, TwoWritesOfZeroCell) {
    const CycleResult r = execute(make_program({Opcode::Write, Opcode::Write}), {});
    EXPECT_TRUE(r.produced_percept);
    EXPECT_EQ(r.observation, 0u);
    EXPECT_EQ(r.raw_reward_byte, 0u);
    EXPECT_EQ(r.steps_used, 2u);
}

TEST(Execute, IncWriteIncWrite) {
    const CycleResult r =
        execute(make_program({Opcode::Inc, Opcode::Write, Opcode::Inc, Opcode::Write}), {});
    EXPECT_TRUE(r.produced_percept);
    EXPECT_EQ(r.observation, 1u % 3u);
    EXPECT_EQ(r.raw_reward_byte, 2u);
    EXPECT_EQ(r.steps_used, 4u);
}

TEST(Execute, SingleWriteStillDefaults) {
    const CycleResult r = execute(make_program({Opcode::Inc, Opcode::Write}), {});
    EXPECT_FALSE(r.produced_percept);
}

TEST(Execute, ReadsHistoryBytesThenRandomBytes) {
    // history [count=1, (o=1, r=1/2, a=0)] encodes to 00 01 01 80 00
    History h{Percept{1, Dyadic(BigInt(1), 1)}, Action{0}};
    // skip the two count bytes, then expose the observation and reward bytes
    const Program p = make_program({Opcode::Read, Opcode::Read, Opcode::Read, Opcode::Write,
                                    Opcode::Read, Opcode::Write});
    const CycleResult r = execute(p, h);
    EXPECT_TRUE(r.produced_percept);
    EXPECT_EQ(r.observation, 1u);          // first write: the observation byte 0x01
    EXPECT_EQ(r.raw_reward_byte, 0x80u);   // second write: the quantized reward byte
}

TEST(Execute, RandomBytesBeyondHistoryAreSeedDeterministic) {
    // consume the 2-byte header of the empty history, then two fresh bytes
    const Program p = make_program({Opcode::Read, Opcode::Read, Opcode::Read, Opcode::Write,
                                    Opcode::Read, Opcode::Write});
    const CycleResult a = execute(p, {}, 123);
    const CycleResult b = execute(p, {}, 123);
    EXPECT_EQ(a.observation, b.observation);
    EXPECT_EQ(a.raw_reward_byte, b.raw_reward_byte);
    bool differs = false;
    for (std::uint64_t seed = 0; seed < 16 && !differs; ++seed) {
        const CycleResult c = execute(p, {}, seed);
        differs = c.observation != a.observation || c.raw_reward_byte != a.raw_reward_byte;
    }
    EXPECT_TRUE(differs);
}

TEST(Execute, InfiniteLoopHitsStepLimit) {
    // "+[+]" never terminates: cell stays nonzero
    const Program p =
        make_program({Opcode::Inc, Opcode::LoopStart, Opcode::Inc, Opcode::LoopEnd});
    const CycleResult r = execute(p, {}, 1, 500);
    EXPECT_EQ(r.steps_used, 500u);
    EXPECT_FALSE(r.produced_percept);
}

TEST(Execute, LoopSkipsWhenCellZero) {
    // "[+]" with cell 0 jumps past the loop in one step
    const Program p = make_program({Opcode::LoopStart, Opcode::Inc, Opcode::LoopEnd});
    const CycleResult r = execute(p, {});
    EXPECT_EQ(r.steps_used, 1u);
}

TEST(Execute, UnmatchedLoopEndIsNoOp) {
    // "]++.." writes 2 twice
    const Program p = make_program(
        {Opcode::LoopEnd, Opcode::Inc, Opcode::Inc, Opcode::Write, Opcode::Write});
    const CycleResult r = execute(p, {});
    EXPECT_TRUE(r.produced_percept);
    EXPECT_EQ(r.observation, 2u);
    EXPECT_EQ(r.raw_reward_byte, 2u);
    EXPECT_EQ(r.steps_used, 5u);
}

TEST(Execute, UnmatchedLoopStartJumpsToEnd) {
    // "[.." with cell 0: one step, no output
    const Program p = make_program({Opcode::LoopStart, Opcode::Write, Opcode::Write});
    const CycleResult r = execute(p, {});
    EXPECT_FALSE(r.produced_percept);
    EXPECT_EQ(r.steps_used, 1u);
}

TEST(Execute, TapeGrowsBothDirections) {
    // "<+.>.": inc the cell left of the origin, write it, then write cell 0
    const Program p = make_program({Opcode::Left, Opcode::Inc, Opcode::Write, Opcode::Right,
                                    Opcode::Write});
    const CycleResult r = execute(p, {});
    EXPECT_TRUE(r.produced_percept);
    EXPECT_EQ(r.observation, 1u);         // cell at -1 holds 1
    EXPECT_EQ(r.raw_reward_byte, 0u);     // cell at 0 untouched
}

TEST(Execute, TotalityOverAllShortPrograms) {
    // every syntactically valid program yields a percept within the limit
    History h{Percept{2, Dyadic(BigInt(1), 2)}, Action{1}};
    for (const auto& p : enumerate_programs(3)) {
        const CycleResult r = execute(p, h, 7, 256);
        EXPECT_LE(r.steps_used, 256u);
        EXPECT_LT(r.observation, 3u);
        EXPECT_LE(r.raw_reward_byte, 255u);
    }
}

TEST(Complexity, LengthAndKtBits) {
    EXPECT_EQ(complexity(Program{}, 0).length_bits, 1u);
    EXPECT_EQ(complexity(make_program({Opcode::Left}), 0).length_bits, 6u);
    EXPECT_EQ(complexity(make_program({Opcode::Left}), 0).kt_bits, 6u);  // log2(1) = 0
    EXPECT_EQ(complexity(Program{}, 1).kt_bits, 2u);                     // ceil(log2(2)) = 1
    EXPECT_EQ(complexity(Program{}, 2).kt_bits, 3u);                     // ceil(log2(3)) = 2
    EXPECT_EQ(complexity(Program{}, 4096).kt_bits, 1u + 13u);
    EXPECT_GE(complexity(make_program({Opcode::Read}), 77).kt_bits,
              complexity(make_program({Opcode::Read}), 77).length_bits);
}

TEST(ProgramEnvironment, EmptyProgramYieldsZeroRewardForever) {
    ProgramEnvironment env(Program{}, {ActionSpace{3}, ObservationSpace{3}},
                           BoundingSchedule::halving());
    RandomAgent agent;
    const InteractionRecord record = run_episode(agent, env, 25, 3);
    EXPECT_TRUE(record.cumulative_reward.is_zero());
}

TEST(ProgramEnvironment, CumulativeRewardNeverExceedsOne) {
    Rng rng(55);
    auto programs = sample_programs(40, LengthDistribution::default_distribution(), rng);
    for (const auto& p : programs) {
        ProgramEnvironment env(p, {ActionSpace{3}, ObservationSpace{3}},
                               BoundingSchedule::halving(), 512);
        RandomAgent agent;
        const InteractionRecord record = run_episode(agent, env, 40, 9);
        EXPECT_TRUE(record.cumulative_reward.in_unit_interval()) << p.mnemonic();
    }
}

TEST(ProgramEnvironment, RecordsValidateAgainstTheSpaces) {
    Rng rng(66);
    auto programs = sample_programs(25, LengthDistribution::default_distribution(), rng);
    for (const auto& p : programs) {
        ProgramEnvironment env(p, {ActionSpace{3}, ObservationSpace{3}},
                               BoundingSchedule::halving(), 512);
        RandomAgent agent;
        const InteractionRecord record = run_episode(agent, env, 20, 4);
        EXPECT_TRUE(validate_history(record.history, env.spaces())) << p.mnemonic();
    }
}

TEST(ProgramEnvironment, DeterministicRecords) {
    const Program p = make_program({Opcode::Read, Opcode::Read, Opcode::Read, Opcode::Write,
                                    Opcode::Read, Opcode::Write, Opcode::Inc});
    ProgramEnvironment env(p, {ActionSpace{3}, ObservationSpace{3}},
                           BoundingSchedule::halving());
    RandomAgent agent;
    const auto a = run_episode(agent, env, 30, 21);
    const auto b = run_episode(agent, env, 30, 21);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.cumulative_reward, b.cumulative_reward);
}

TEST(Sampling, EmptyAndDeterministicDraws) {
    Rng rng1(8), rng2(8);
    const auto d = LengthDistribution::default_distribution();
    EXPECT_TRUE(sample_programs(0, d, rng1).empty());
    const auto a = sample_programs(50, d, rng1);
    rng1 = Rng(8);
    const auto b = sample_programs(50, d, rng1);
    EXPECT_EQ(a, b);
    (void)rng2;
}

TEST(Sampling, EmpiricalMeanLengthWithinThreeSigma) {
    const auto d = LengthDistribution::default_distribution();
    const double mean = to_double(d.mean());
    Rat second_moment = 0;
    for (std::size_t n = 0; n <= d.max_length(); ++n)
        second_moment += Rat(BigInt(n) * BigInt(n)) * d.probability(n);
    const double variance = to_double(second_moment) - mean * mean;

    Rng rng(424242);
    const int n = 10000;
    double total = 0;
    for (const auto& p : sample_programs(n, d, rng)) total += static_cast<double>(p.opcode_count());
    const double sigma = std::sqrt(variance / n);
    EXPECT_NEAR(total / n, mean, 3 * sigma);
}

TEST(Corpus, WriteParseRoundTrip) {
    const auto programs = enumerate_programs(2);
    std::stringstream buffer;
    write_corpus(buffer, programs, "test corpus");
    const auto parsed = parse_corpus(buffer, "test");
    EXPECT_EQ(parsed, programs);
}

TEST(Corpus, HexForms) {
    EXPECT_EQ(program_to_hex(Program{}), "80");                       // "1" padded
    EXPECT_EQ(program_to_hex(make_program({Opcode::Left})), "40");    // "010000" padded
    EXPECT_EQ(program_from_hex("80"), Program{});
    EXPECT_EQ(program_from_hex("40"), make_program({Opcode::Left}));
}

TEST(Corpus, ParseErrorsNameTheLine) {
    std::stringstream buffer("# ok\n80\nzz\n");
    try {
        parse_corpus(buffer, "corpus.txt");
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("corpus.txt:3"), std::string::npos);
    }
    std::stringstream nonzero_padding("41\n");  // "010000" with a stray 1 in the padding
    EXPECT_THROW(parse_corpus(nonzero_padding, "p"), IoError);
    std::stringstream extra_bytes("4000\n");
    EXPECT_THROW(parse_corpus(extra_bytes, "p"), IoError);
}
