#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "evx/netsim/router.hpp"
#include "evx/netsim/simulator.hpp"

using namespace evx::netsim;

namespace {

std::uint64_t bits_of(double d) {
    std::uint64_t b = 0;
    std::memcpy(&b, &d, sizeof b);
    return b;
}

struct Sink : Node {
    std::vector<Frame> got;
    std::vector<std::uint64_t> timers;
    void on_frame(Simulator&, const Frame& f) override { got.push_back(f); }
    void on_timer(Simulator&, std::uint64_t t) override { timers.push_back(t); }
};

/// Echoes every frame back on the link it came from.
struct Echo : Node {
    void on_frame(Simulator& sim, const Frame& f) override { sim.send(f.link, id(), f.payload); }
};

}  // namespace

TEST_CASE("rng engine matches the standard mt19937_64 sequence") {
    Rng r(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) x = r.next_u64();
    CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("uniform_below rejects a zero bound and stays in range") {
    Rng r(1);
    CHECK_THROWS_AS(r.uniform_below(0), std::invalid_argument);
    for (int i = 0; i < 1000; ++i) CHECK(r.uniform_below(7) < 7);
}

TEST_CASE("sample_delay examples") {
    Rng r(3);
    CHECK(sample_delay(LatencyModel::constant(1.0e-3), r) == 1.0e-3);
    CHECK(sample_delay(LatencyModel::jittered(2.0e-3, 0.0), r) == 2.0e-3);
    CHECK(sample_delay(LatencyModel::constant(-5.0), r) == kMinDelay);

    // Value re-derived by tests/oracles/mt64_oracle.py.
    Rng seeded(42);
    const LatencyModel lns = LatencyModel::wireless(
        WirelessPreset{PropagationModel::LogNormalShadowing, 2.0, WifiStandard::AC80211});
    const double d = sample_delay(lns, seeded);
    CHECK(bits_of(d) == 0x3f5bd4ebcaf049ccULL);
    const LatencyModel resolved = resolve_preset(*lns.preset);
    CHECK(d > kMinDelay);
    CHECK(d < resolved.base_delay + 5 * resolved.jitter_std);
}

TEST_CASE("wireless presets order by standard, distance and propagation family") {
    auto mk = [](PropagationModel p, double d, WifiStandard s) { return resolve_preset({p, d, s}); };
    const auto ldpl = PropagationModel::LogDistancePathLoss;
    const auto lns = PropagationModel::LogNormalShadowing;
    CHECK(mk(ldpl, 2, WifiStandard::G80211).base_delay > mk(ldpl, 2, WifiStandard::AC80211).base_delay);
    CHECK(mk(ldpl, 10, WifiStandard::AC80211).base_delay > mk(ldpl, 2, WifiStandard::AC80211).base_delay);
    CHECK(mk(lns, 2, WifiStandard::AC80211).jitter_std > mk(ldpl, 2, WifiStandard::AC80211).jitter_std);
}

TEST_CASE("delay positivity over a million samples") {
    Rng r(2024);
    const LatencyModel wide = LatencyModel::jittered(0.1e-3, 1.0e-3);
    double smallest = 1.0;
    for (int i = 0; i < 1'000'000; ++i) smallest = std::min(smallest, sample_delay(wide, r));
    CHECK(smallest >= kMinDelay);
    CHECK(smallest == kMinDelay);
}

TEST_CASE("schedule_send and LinkDown") {
    EventQueue q;
    SimClock clock;
    Rng r(1);
    Link up{0, 1, LatencyModel::constant(1e-3), true};
    const Frame f = schedule_send(q, 0, up, 0, {1, 2, 3}, clock, r);
    CHECK(f.deliver_at == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(f.deliver_at >= f.sent_at + kMinDelay);
    CHECK(f.dst == 1);

    Link down = up;
    down.up = false;
    CHECK_THROWS_AS(schedule_send(q, 0, down, 0, {}, clock, r), LinkDown);
}

TEST_CASE("two sends on one link deliver in sampled-delay order") {
    EventQueue q;
    SimClock clock;
    Rng r(11);
    Link l{0, 1, LatencyModel::jittered(1e-3, 0.5e-3), true};
    const Frame a = schedule_send(q, 0, l, 0, {0xA}, clock, r);
    const Frame b = schedule_send(q, 0, l, 0, {0xB}, clock, r);
    const Event first = q.advance(clock);
    const Event second = q.advance(clock);
    const auto& fa = std::get<Frame>(first.body);
    const auto& fb = std::get<Frame>(second.body);
    CHECK(fa.deliver_at <= fb.deliver_at);
    CHECK(fa.payload[0] == (a.deliver_at <= b.deliver_at ? 0xA : 0xB));
}

TEST_CASE("advance orders by time then insertion") {
    EventQueue q;
    SimClock clock;
    q.push(3e-3, TimerEvent{0, 1});
    q.push(1e-3, TimerEvent{0, 2});
    q.push(2e-3, TimerEvent{0, 3});
    q.push(2e-3, TimerEvent{0, 4});
    CHECK(std::get<TimerEvent>(q.advance(clock).body).token == 2);
    CHECK(clock.now == 0.001);
    CHECK(std::get<TimerEvent>(q.advance(clock).body).token == 3);
    CHECK(std::get<TimerEvent>(q.advance(clock).body).token == 4);
    CHECK(std::get<TimerEvent>(q.advance(clock).body).token == 1);
    CHECK_THROWS_AS(q.advance(clock), EmptyQueue);
}

TEST_CASE("a link that goes down loses frames in flight") {
    Simulator sim(1);
    Sink a, b;
    sim.add_node(a);
    sim.add_node(b);
    const auto l = sim.add_link(a.id(), b.id(), LatencyModel::constant(1e-3));
    sim.send(l, a.id(), {1});
    sim.set_link_up(l, false);
    sim.run();
    CHECK(b.got.empty());
    CHECK_THROWS_AS(sim.send(l, a.id(), {2}), LinkDown);
}

TEST_CASE("ordered links never overtake") {
    Simulator sim(5);
    Sink a, b;
    sim.add_node(a);
    sim.add_node(b);
    const auto l = sim.add_link(a.id(), b.id(), LatencyModel::jittered(1e-3, 1e-3), true, true);
    for (std::uint8_t i = 0; i < 200; ++i) sim.send(l, a.id(), {i});
    sim.run();
    REQUIRE(b.got.size() == 200);
    for (std::uint8_t i = 0; i < 200; ++i) CHECK(b.got[i].payload[0] == i);
}

TEST_CASE("router forwards unchanged payload and metadata") {
    Simulator sim(2);
    Sink a, b;
    Router r;
    sim.add_node(a);
    sim.add_node(r);
    sim.add_node(b);
    const auto la = sim.add_link(a.id(), r.id(), LatencyModel::constant(1e-3));
    const auto lb = sim.add_link(r.id(), b.id(), LatencyModel::constant(2e-3));
    r.attach(la, lb);
    sim.send(la, a.id(), {9, 8, 7}, SendOptions{0.0, true, 0x1234, 5});
    sim.run();
    REQUIRE(b.got.size() == 1);
    CHECK(b.got[0].payload == Bytes{9, 8, 7});
    CHECK(b.got[0].opaque);
    CHECK(b.got[0].seal == 0x1234);
    CHECK(b.got[0].overlay == 5);
    CHECK(sim.now() == doctest::Approx(3e-3));
}

TEST_CASE("clock is monotonic and equal seeds give identical logs") {
    auto run = [](std::uint64_t seed) {
        Simulator sim(seed);
        sim.enable_log(true);
        Echo e;
        Sink s;
        sim.add_node(e);
        sim.add_node(s);
        const auto l = sim.add_link(s.id(), e.id(), LatencyModel::jittered(1e-3, 0.3e-3));
        for (std::uint8_t i = 0; i < 50; ++i) sim.send(l, s.id(), {i});
        sim.schedule_timer(s.id(), 0.5e-3, 77);
        double last = 0.0;
        while (sim.step()) {
            CHECK(sim.now() >= last);
            last = sim.now();
        }
        return sim.log();
    };
    const std::string a = run(99);
    CHECK(a == run(99));
    CHECK(a != run(100));
    CHECK(a.find(" T ") != std::string::npos);
}

TEST_CASE("run honours the horizon and stop") {
    Simulator sim(1);
    Sink s;
    sim.add_node(s);
    sim.schedule_timer(s.id(), 1.0, 1);
    sim.schedule_timer(s.id(), 5.0, 2);
    sim.run(2.0);
    CHECK(s.timers == std::vector<std::uint64_t>{1});
    CHECK(sim.pending() == 1);
}
