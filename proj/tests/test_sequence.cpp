#include <doctest.h>

#include <map>
#include <set>

#include "cotdr/sequence.hpp"
#include "oracles.hpp"

using namespace cotdr;

TEST_SUITE_BEGIN("sequence");

TEST_CASE("prbs order 7 seed 1: one period, 64 ones / 63 zeros") {
    BitSequence seq = generate_prbs(7, 1);
    REQUIRE(seq.length() == 127);
    int ones = 0;
    for (bool b : seq.bits) ones += b ? 1 : 0;
    CHECK(ones == 64);
    CHECK(static_cast<int>(seq.length()) - ones == 63);

    auto ref = oracle::lfsr_sequence(7, {7, 6}, 1, 127);
    for (std::size_t i = 0; i < 127; ++i)
        REQUIRE(static_cast<int>(seq.bits[i]) == ref[i]);
}

TEST_CASE("prbs order 5 has period 31") {
    CHECK(generate_prbs(5, 1).length() == 31);
}

TEST_CASE("prbs rejects bad order and seed") {
    CHECK_THROWS_AS(generate_prbs(7, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(4, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(32, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_prbs(7, 1 << 7), std::invalid_argument);
}

TEST_CASE("every non-zero n-bit pattern occurs exactly once per period") {
    for (int order : {5, 6, 7, 8, 9, 10}) {
        BitSequence seq = generate_prbs(order, 1);
        const std::size_t period = seq.length();
        std::map<std::uint32_t, int> histogram;
        for (std::size_t i = 0; i < period; ++i) {
            std::uint32_t window = 0;
            for (int k = 0; k < order; ++k)
                window = (window << 1) | (seq.bits[(i + k) % period] ? 1 : 0);
            histogram[window]++;
        }
        REQUIRE(histogram.size() == period);
        CHECK(histogram.count(0) == 0);
        for (const auto& [pattern, count] : histogram) {
            (void)pattern;
            CHECK(count == 1);
        }
    }
}

TEST_CASE("lfsr state returns to the seed after exactly one period") {
    for (int order : {11, 12, 13, 14, 15, 16, 17, 18, 20, 24}) {
        const auto& taps = prbs_taps(order);
        const std::uint64_t mask = (1ULL << order) - 1;
        std::uint64_t state = 1;
        std::uint64_t steps = 0;
        do {
            std::uint64_t fb = 0;
            for (int t : taps) fb ^= (state >> (t - 1));
            state = ((state << 1) | (fb & 1)) & mask;
            ++steps;
        } while (state != 1);
        CHECK(steps == mask);
    }
}

TEST_CASE("bipolar circular autocorrelation: period at lag 0, -1 at every other lag") {
    for (int order : {5, 7, 10}) {
        BitSequence seq = generate_prbs(order, 3);
        const std::size_t period = seq.length();
        std::vector<double> b(period);
        for (std::size_t i = 0; i < period; ++i) b[i] = seq.bits[i] ? 1.0 : -1.0;
        for (std::size_t lag = 0; lag < period; ++lag) {
            double acc = 0.0;
            for (std::size_t i = 0; i < period; ++i) acc += b[i] * b[(i + lag) % period];
            const double expected = lag == 0 ? static_cast<double>(period) : -1.0;
            REQUIRE(acc == expected);  // exact integer arithmetic in doubles
        }
    }
}

TEST_CASE("build_burst computes the fill length and trigger") {
    BurstFrame f = build_burst(generate_prbs(7, 1), 10e9, 60e-6);
    CHECK(f.fill_length == 600000);
    CHECK(f.trigger_index == 0);

    BurstFrame nofill = build_burst(generate_prbs(7, 1), 10e9, 0.0);
    CHECK(nofill.frame_duration() == doctest::Approx(12.7e-9));

    CHECK_THROWS_AS(build_burst(BitSequence{}, 10e9, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_burst(generate_prbs(7, 1), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_burst(generate_prbs(7, 1), 10e9, -1.0), std::invalid_argument);
}

TEST_CASE("ideal NRZ synthesis: 5 samples per bit") {
    BurstFrame f;
    f.payload.bits = {true, false, true};
    f.bit_rate = 10e9;
    AnalogTrace w = synthesize_waveform(f, 50e9, 0.0);
    REQUIRE(w.samples.size() == 15);
    for (int i = 0; i < 5; ++i) {
        CHECK(w.samples[i] == 1.0);
        CHECK(w.samples[5 + i] == 0.0);
        CHECK(w.samples[10 + i] == 1.0);
    }
}

TEST_CASE("synthesis rejects undersampling and long rise times") {
    BurstFrame f = build_burst(generate_prbs(5, 1), 10e9, 0.0);
    CHECK_THROWS_AS(synthesize_waveform(f, 10e9, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_waveform(f, 50e9, 100e-12), std::invalid_argument);
}

TEST_CASE("gaussian step response: frozen edge samples for 30 ps rise at 50 GS/s") {
    BurstFrame f;
    f.payload.bits = {true};
    f.bit_rate = 10e9;
    f.fill_length = 9;
    AnalogTrace w = synthesize_waveform(f, 50e9, 30e-12);
    // Independent evaluation of Phi(t/sigma) - Phi((t-T)/sigma),
    // sigma = 30 ps / 2.5631031..., at t = 0 and t = 20 ps.
    CHECK(w.samples[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(w.samples[1] == doctest::Approx(0.956250015).epsilon(1e-6));
    // Monotone rise across the edge, then symmetric fall at the bit end.
    CHECK(w.samples[2] > w.samples[1]);
    CHECK(w.samples[5] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(w.samples[6] < w.samples[5]);
    for (double v : w.samples) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("zero rise time is idempotent under re-sampling at bit centers") {
    BitSequence seq = generate_prbs(7, 1);
    BurstFrame f = build_burst(seq, 10e9, 0.0);
    AnalogTrace w = synthesize_waveform(f, 50e9, 0.0);
    for (std::size_t k = 0; k < seq.length(); ++k) {
        const double expected = seq.bits[k] ? 1.0 : 0.0;
        CHECK(w.samples[5 * k + 2] == expected);
    }
}

TEST_CASE("non-integer samples per bit stay on the uniform grid") {
    BurstFrame f;
    f.payload.bits = {true, true, false, true};
    f.bit_rate = 10e9;
    AnalogTrace w = synthesize_waveform(f, 25e9, 0.0);  // 2.5 samples/bit
    REQUIRE(w.samples.size() == 10);
    // Bit boundaries at samples 2.5, 5, 7.5.
    CHECK(w.samples[2] == 1.0);   // t=80ps, bit 0
    CHECK(w.samples[5] == 0.0);   // t=200ps, bit 2
    CHECK(w.samples[7] == 0.0);   // t=280ps, bit 2
    CHECK(w.samples[8] == 1.0);   // t=320ps, bit 3
}

TEST_SUITE_END();
