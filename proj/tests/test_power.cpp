#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "evx/power/billing.hpp"
#include "evx/netsim/rng.hpp"

using namespace evx::power;

namespace {

Evse energized(std::int64_t power_w, double limit_kwh = 1e6) {
    Evse e{"EVSE-A", Delivery{power_w, kwh_to_ws(limit_kwh), 0}};
    return e;
}

}  // namespace

TEST_CASE("unit conversion is exact for whole watt-seconds") {
    CHECK(kwh_to_ws(1.0) == 3'600'000);
    CHECK(kwh_to_ws(-0.5) == -1'800'000);
    CHECK(ws_to_kwh(3'600'000) == 1.0);
    const auto b = Battery::from_kwh(60, 0.3);
    CHECK(b.capacity == 216'000'000);
    CHECK(b.stored == 64'800'000);
    CHECK(b.soc() == doctest::Approx(0.3));
}

TEST_CASE("10 kW for 0.1 h delivers 1 kWh") {
    auto evse = energized(10'000);
    auto bat = Battery::from_kwh(60, 0.5);
    const auto before = bat.stored;
    const auto r = tick_power(evse, bat, 360.0, 360.0);
    CHECK(r.energy == kwh_to_ws(1.0));
    CHECK(r.energy_kwh() == 1.0);
    CHECK(r.evse_id == "EVSE-A");
    CHECK(r.interval == 360.0);
    CHECK(bat.stored - before == kwh_to_ws(1.0));
    CHECK(bat.abuse_flags == 0);
}

TEST_CASE("a full battery takes nothing and flags overcharge") {
    auto evse = energized(11'000);
    auto bat = Battery::from_kwh(60, 1.0);
    const auto r = tick_power(evse, bat, 1.0, 1.0);
    CHECK(r.energy == 0);
    CHECK(bat.soc() == 1.0);
    CHECK(bat.has(AbuseFlag::OverchargeCommanded));
    CHECK_FALSE(bat.has(AbuseFlag::DeepDischargeCommanded));
}

TEST_CASE("discharge at -5 kW for 0.2 h draws 1 kWh") {
    auto evse = energized(-5'000);
    auto bat = Battery::from_kwh(60, 0.5);
    const auto before = bat.stored;
    const auto r = tick_power(evse, bat, 720.0, 720.0);
    CHECK(r.energy == -kwh_to_ws(1.0));
    CHECK(bat.stored == before - kwh_to_ws(1.0));
    CHECK(bat.soc() < 0.5);
}

TEST_CASE("an empty battery flags deep discharge and never goes negative") {
    auto evse = energized(-5'000);
    auto bat = Battery::from_kwh(10, 0.0001);
    const auto r = tick_power(evse, bat, 3600.0, 3600.0);
    CHECK(r.energy == -Battery::from_kwh(10, 0.0001).stored);
    CHECK(bat.stored == 0);
    CHECK(bat.has(AbuseFlag::DeepDischargeCommanded));
}

TEST_CASE("delivery stops at the session target") {
    auto evse = energized(10'000, 0.005);
    auto bat = Battery::from_kwh(60, 0.2);
    WattSeconds total = 0;
    for (int i = 0; i < 10; ++i) total += tick_power(evse, bat, 1.0, i + 1.0).energy;
    CHECK(total == 18'000);
}

TEST_CASE("reading magnitude never exceeds power times interval") {
    evx::netsim::Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto p = static_cast<std::int64_t>(rng.uniform_below(44'000)) - 22'000;
        auto evse = energized(p == 0 ? 1 : p);
        auto bat = Battery::from_kwh(60, rng.uniform01());
        const double dt = rng.uniform01() * 2.0;
        const auto r = tick_power(evse, bat, dt, dt);
        CHECK(static_cast<double>(r.energy < 0 ? -r.energy : r.energy) <= std::abs(static_cast<double>(p)) * dt);
        CHECK(bat.stored >= 0);
        CHECK(bat.stored <= bat.capacity);
    }
}

TEST_CASE("ticking a station without delivery throws NotEnergized") {
    Evse idle{"EVSE-B", std::nullopt};
    Battery bat = Battery::from_kwh(60, 0.5);
    CHECK_THROWS_AS(tick_power(idle, bat, 1.0, 1.0), NotEnergized);
}

TEST_CASE("bill charges and credits the bound contract") {
    BillingLedger ledger;
    const SessionBinding v{1, "V-001"};
    const SessionBinding a{2, "A-007"};
    bill(ledger, &v, MeterReading{"EVSE-A", kwh_to_ws(1.0), 360, 360});
    bill(ledger, &a, MeterReading{"EVSE-B", -kwh_to_ws(1.0), 720, 720});
    CHECK(ledger.billed("V-001") == kwh_to_ws(1.0));
    CHECK(ledger.billed("A-007") == -kwh_to_ws(1.0));
    CHECK(ledger.billed("nobody") == 0);
    CHECK(ledger.entries().size() == 2);
    CHECK(ledger.total() == 0);
    CHECK_THROWS_AS(bill(ledger, nullptr, MeterReading{"EVSE-C", 1, 1, 1}), UnboundSession);
    CHECK(ledger.entries().size() == 2);
}

TEST_CASE("ledger CSV uses six-decimal fixed formatting") {
    BillingLedger ledger;
    const SessionBinding v{2684354561ULL, "V-001"};
    bill(ledger, &v, MeterReading{"EVSE-B", 3056, 1.0, 12.25});
    bill(ledger, &v, MeterReading{"EVSE-B", -1800000, 1.0, 13.25});
    std::ostringstream os;
    ledger.write_csv(os);
    CHECK(os.str() ==
          "session_id,contract_id,timestamp,energy_kwh\n"
          "2684354561,V-001,12.250000,0.000849\n"
          "2684354561,V-001,13.250000,-0.500000\n");
}

TEST_CASE("control center keeps meter totals equal to ledger totals") {
    ControlCenter cc;
    cc.register_contract("V-001", true);
    cc.register_contract("A-001", true);
    cc.bind("EVSE-A", SessionBinding{1, "A-001"});
    cc.bind("EVSE-B", SessionBinding{2, "V-001"});
    evx::netsim::Rng rng(5);
    WattSeconds sum = 0;
    for (int i = 0; i < 5000; ++i) {
        const auto e = static_cast<WattSeconds>(rng.uniform_below(20'000)) - 5'000;
        cc.record(MeterReading{i % 2 == 0 ? "EVSE-A" : "EVSE-B", e, 1.0, i * 1.0});
        sum += e;
    }
    CHECK(cc.metered("EVSE-A") + cc.metered("EVSE-B") == sum);
    CHECK(cc.ledger().total() == sum);
    CHECK(cc.ledger().billed("A-001") == cc.metered("EVSE-A"));
    CHECK(cc.ledger().billed("V-001") == cc.metered("EVSE-B"));

    cc.release("EVSE-A");
    CHECK(cc.binding("EVSE-A") == nullptr);
    CHECK_THROWS_AS(cc.record(MeterReading{"EVSE-A", 1, 1, 1}), UnboundSession);
    CHECK(cc.metered("EVSE-A") + cc.metered("EVSE-B") == sum);
}

TEST_CASE("conservation over many short ticks") {
    auto evse = energized(7'400);
    auto bat = Battery::from_kwh(40, 0.1);
    const auto start = bat.stored;
    WattSeconds metered = 0;
    evx::netsim::Rng rng(9);
    double t = 0;
    for (int i = 0; i < 20'000; ++i) {
        const double dt = 0.001 + rng.uniform01();
        t += dt;
        metered += tick_power(evse, bat, dt, t).energy;
    }
    CHECK(bat.stored - start == metered);
}
