#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "evx/guard/analytics.hpp"
#include "rig_util.hpp"

using namespace evx::guard;
namespace netsim = evx::netsim;
using evx::testing::GuardBench;

namespace {

using Dec = boost::multiprecision::cpp_dec_float_50;

RttStats oracle_stats(const std::vector<double>& xs) {
    Dec sum = 0;
    for (double x : xs) sum += Dec(x);
    const Dec mean = sum / Dec(xs.size());
    Dec sq = 0;
    for (double x : xs) sq += (Dec(x) - mean) * (Dec(x) - mean);
    const Dec sd = boost::multiprecision::sqrt(sq / Dec(xs.size()));
    return RttStats{mean.convert_to<double>(), sd.convert_to<double>()};
}

/// Forwards between two ports and rewrites the symbol of one response.
struct SymbolFlipper : netsim::Node {
    netsim::LinkId a = 0, b = 0;
    std::uint32_t target = 5;
    void on_frame(netsim::Simulator& sim, const netsim::Frame& f) override {
        auto payload = f.payload;
        if (auto ex = decode_exchange(payload); ex && ex->tag == kResponseTag && ex->index == target) {
            ex->symbol ^= 1;
            payload = encode_exchange(*ex);
        }
        sim.send(f.link == a ? b : a, id(), std::move(payload), netsim::SendOptions{0.0, f.opaque, f.seal});
    }
};

}  // namespace

// ------------------------------------------------------------------ config

TEST_CASE("config validation") {
    CHECK_NOTHROW(DBConfig{}.validate());
    DBConfig c;
    c.k = 0;
    CHECK_THROWS_AS(c.validate(), BadConfig);
    c = DBConfig{};
    c.N = 1;
    CHECK_THROWS_AS(c.validate(), BadConfig);
    c.N = 257;
    CHECK_THROWS_AS(c.validate(), BadConfig);
    c = DBConfig{};
    c.mu_max = 0;
    CHECK_THROWS_AS(c.validate(), BadConfig);
    c = DBConfig{};
    c.sigma_max = -1;
    CHECK_THROWS_AS(c.validate(), BadConfig);
    c = DBConfig{};
    c.per_exchange_timeout = 0;
    CHECK_THROWS_AS(c.validate(), BadConfig);
}

TEST_CASE("outcome names round-trip") {
    for (auto o : {Outcome::Accept, Outcome::TimingAlert, Outcome::IntegrityAlert, Outcome::Timeout})
        CHECK(outcome_from_string(to_string(o)) == o);
    CHECK_THROWS_AS(outcome_from_string("Maybe"), std::invalid_argument);
}

// ------------------------------------------------------------------ challenge

TEST_CASE("challenge generation") {
    netsim::Rng seven(7);
    // Pinned from the reference mt19937_64 oracle in tests/oracles.
    CHECK(generate_challenge(seven, 3, 2) == Symbols{1, 0, 0});

    netsim::Rng r(1);
    const auto one = generate_challenge(r, 1, 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0] <= 1);

    CHECK_THROWS_AS(generate_challenge(r, 0, 2), BadConfig);
    CHECK_THROWS_AS(generate_challenge(r, 3, 1), BadConfig);

    netsim::Rng a(99), b(99);
    const auto big = generate_challenge(a, 1000, 128);
    CHECK(big == generate_challenge(b, 1000, 128));
    for (auto s : big) CHECK(s < 128);
}

// ------------------------------------------------------------------ stats

TEST_CASE("compute_stats examples") {
    const std::vector<double> flat{2e-3, 2e-3, 2e-3};
    auto s = compute_stats(flat);
    CHECK(s.mu == 2e-3);
    CHECK(s.sigma == 0.0);

    const std::vector<double> two{1e-3, 3e-3};
    s = compute_stats(two);
    CHECK(s.mu == doctest::Approx(2e-3).epsilon(1e-14));
    CHECK(s.sigma == doctest::Approx(1e-3).epsilon(1e-14));

    CHECK_THROWS_AS(compute_stats(std::vector<double>{}), EmptyInput);
}

TEST_CASE("compute_stats agrees with an arbitrary-precision oracle") {
    netsim::Rng rng(7);
    const auto model = netsim::LatencyModel::jittered(0.3e-3, 0.05e-3);
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(netsim::sample_delay(model, rng));
    const auto got = compute_stats(xs);
    const auto want = oracle_stats(xs);
    CHECK(std::abs(got.mu - want.mu) <= 1e-12 * want.mu);
    CHECK(std::abs(got.sigma - want.sigma) <= 1e-12 * want.sigma);
}

TEST_CASE("thresholds use strict inequality") {
    const DBConfig d;
    CHECK(check_thresholds(1.0e-3, 0.2e-3, d) == Outcome::Accept);
    CHECK(check_thresholds(2.5e-3, 0.1e-3, d) == Outcome::TimingAlert);
    CHECK(check_thresholds(2.0e-3, 0.1e-3, d) == Outcome::Accept);
    CHECK(check_thresholds(1.0e-3, 0.5e-3, d) == Outcome::Accept);
    CHECK(check_thresholds(1.0e-3, 0.5001e-3, d) == Outcome::TimingAlert);
}

// ------------------------------------------------------------------ transcript

TEST_CASE("interleave and verify") {
    CHECK(interleave(Symbols{10, 20}, Symbols{11, 21}) == Symbols{10, 11, 20, 21});
    CHECK(interleave(Symbols{7}, Symbols{8}) == Symbols{7, 8});
    CHECK_THROWS_AS(interleave(Symbols{1, 2}, Symbols{1, 2, 3}), LengthMismatch);

    const Symbols s{1, 2, 3, 4};
    CHECK(verify_transcript(s, s) == Outcome::Accept);
    Symbols flipped = s;
    flipped[2] ^= 1;
    CHECK(verify_transcript(s, flipped) == Outcome::IntegrityAlert);
    CHECK(verify_transcript(s, Symbols{1, 2, 3}) == Outcome::IntegrityAlert);
}

TEST_CASE("exchange and report frames") {
    const ExchangeFrame f{kResponseTag, 0x01020304, 0x7f};
    const auto bytes = encode_exchange(f);
    CHECK(bytes == Bytes{0x41, 0x01, 0x02, 0x03, 0x04, 0x7f});
    const auto back = decode_exchange(bytes);
    REQUIRE(back);
    CHECK(back->index == f.index);
    CHECK(back->symbol == f.symbol);
    CHECK_FALSE(decode_exchange(Bytes{0x41, 0, 0}));
    CHECK_FALSE(decode_exchange(Bytes{0x05, 0, 0, 0, 0, 0}));
    CHECK(is_guard_frame(bytes));
    CHECK_FALSE(is_guard_frame(Bytes{0x01}));

    const Symbols s{1, 2, 3, 4};
    CHECK(encode_report(s) == Bytes{0x42, 1, 2, 3, 4});
    CHECK(decode_report(encode_report(s)) == s);
}

// ------------------------------------------------------------------ analytics

TEST_CASE("guess success probability is exact") {
    CHECK(guess_success_probability(2, 1) == Rational(1, 2));
    CHECK(guess_success_probability(2, 3) == Rational(1, 8));
    const auto p = guess_success_probability(128, 10);
    CHECK(p == Rational(1) / boost::multiprecision::pow(boost::multiprecision::cpp_int(128), 10));
    // 128^-10 = 2^-70.
    CHECK(p == Rational(1) / boost::multiprecision::pow(boost::multiprecision::cpp_int(2), 70));
    CHECK(to_scientific(p) == "8.47e-22");
    CHECK(to_scientific(p, 6) == "8.47033e-22");
    CHECK(to_scientific(guess_success_probability(2, 3)) == "1.25e-01");
    CHECK_THROWS_AS(guess_success_probability(1, 3), BadConfig);
    CHECK_THROWS_AS(guess_success_probability(2, 0), BadConfig);
}

// ------------------------------------------------------------------ fast exchange over the network

TEST_CASE("legitimate cable: k round trips of about 0.32 ms and Accept") {
    GuardBench b(DBConfig{}, 1);
    b.direct();
    const auto t = fast_exchange(*b.ev, *b.se, b.sim);
    CHECK(t.alpha.size() == 100);
    CHECK(t.beta.size() == 100);
    CHECK(t.alpha_received == t.alpha);
    CHECK(t.beta_received == t.beta);
    REQUIRE(t.rtts.size() == 100);
    for (double r : t.rtts) {
        CHECK(r > 0.2e-3);
        CHECK(r < 0.45e-3);
    }
    while (!b.ev->done() && b.sim.step()) {
    }
    const auto& v = b.ev->verifier().verdict();
    CHECK(v.outcome == Outcome::Accept);
    CHECK(v.mu == doctest::Approx(0.32e-3).epsilon(0.05));
    CHECK(b.ev->duration() < 0.06);
}

TEST_CASE("a silent responder times out on the first exchange") {
    GuardBench b(DBConfig{}, 2);
    b.direct();
    b.se->set_silent(true);
    const auto v = b.run();
    CHECK(v.outcome == Outcome::Timeout);
    CHECK(b.ev->verifier().rtts().empty());
    CHECK(b.ev->duration() == doctest::Approx(0.05));
}

TEST_CASE("cross-relayed WiFi path inflates every round trip") {
    DBConfig cfg;
    cfg.early_abort = false;
    GuardBench b(cfg, 3);
    b.relayed(netsim::LatencyModel::jittered(netsim::calibration::kWifiHopBase, 0.0));
    const auto t = fast_exchange(*b.ev, *b.se, b.sim);
    REQUIRE(t.rtts.size() == 100);
    // Direct path 2 cables + turnaround; relay adds 2 hops + 2 processing delays.
    for (double r : t.rtts) CHECK(r >= 2 * 1.5e-3 + 2 * 0.05e-3);
    while (!b.ev->done() && b.sim.step()) {
    }
    CHECK(b.ev->verifier().verdict().outcome == Outcome::TimingAlert);
}

TEST_CASE("early abort gives the same verdict sooner") {
    auto run = [](bool early) {
        DBConfig cfg;
        cfg.early_abort = early;
        GuardBench b(cfg, 4);
        b.relayed(netsim::LatencyModel::jittered(netsim::calibration::kWiredTunnelBase,
                                                 netsim::calibration::kWiredTunnelJitter));
        const auto v = b.run();
        return std::make_tuple(v.outcome, b.ev->verifier().rtts().size(), b.ev->duration());
    };
    const auto [o1, n1, d1] = run(true);
    const auto [o2, n2, d2] = run(false);
    CHECK(o1 == Outcome::TimingAlert);
    CHECK(o2 == Outcome::TimingAlert);
    CHECK(n1 < n2);
    CHECK(n2 == 100);
    CHECK(d1 < d2);
}

TEST_CASE("a response symbol altered in flight raises IntegrityAlert") {
    GuardBench b(DBConfig{}, 5);
    SymbolFlipper flip;
    const auto f = b.sim.add_node(flip);
    const auto cable = netsim::calibration::plc_cable();
    flip.a = b.sim.add_link(b.ev_id, f, cable, true, true);
    flip.b = b.sim.add_link(f, b.se_id, cable, true, true);
    b.ev->attach(flip.a);
    b.se->attach(flip.b);
    const auto v = b.run();
    CHECK(v.outcome == Outcome::IntegrityAlert);
}

TEST_CASE("early guessing succeeds with probability 1/N^k") {
    for (std::uint32_t k = 1; k <= 3; ++k) {
        DBConfig cfg;
        cfg.k = k;
        cfg.N = 2;
        const int trials = 4000;
        int accepted = 0;
        for (int i = 0; i < trials; ++i) {
            GuardBench b(cfg, 1000 * k + i);
            b.relayed(netsim::LatencyModel::jittered(netsim::calibration::kWiredTunnelBase,
                                                     netsim::calibration::kWiredTunnelJitter),
                      evx::attacker::Evasion{evx::attacker::EvasionKind::EarlyGuess, 2});
            const auto v = b.run();
            if (v.outcome == Outcome::Accept) {
                ++accepted;
                CHECK(v.mu <= cfg.mu_max);
                CHECK(v.sigma <= cfg.sigma_max);
            } else {
                CHECK(v.outcome == Outcome::IntegrityAlert);
            }
        }
        const double p = std::pow(0.5, k);
        const double se = std::sqrt(p * (1 - p) / trials);
        CHECK(std::abs(static_cast<double>(accepted) / trials - p) <= 3 * se);
    }
}
