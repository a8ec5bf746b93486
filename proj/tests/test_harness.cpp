#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "evx/harness/report.hpp"

using namespace evx::harness;
namespace fs = std::filesystem;
using evx::guard::Outcome;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

std::string field_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "";
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("evx_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

// ------------------------------------------------------------------ presets

TEST_CASE("preset catalog") {
    const auto all = list_presets();
    REQUIRE(all.size() == 14);
    std::vector<std::string> names;
    for (const auto& s : all) names.push_back(s.name);
    const std::vector<std::string> expected{"wired",      "wired_off",  "wired_on",   "wifi_5cm",  "wifi_2m",
                                            "wifi_adhoc", "ldpl_2m_g",  "ldpl_2m_ac", "ldpl_10m_g", "ldpl_10m_ac",
                                            "lns_2m_g",   "lns_2m_ac",  "lns_10m_g",  "lns_10m_ac"};
    CHECK(names == expected);

    CHECK(preset("wired").world.topology == Topology::LegitDirect);
    CHECK_FALSE(preset("wired").attack_script);
    CHECK(preset("wired_off").world.topology == Topology::DevicesBridging);
    CHECK(preset("wired_off").world.device_mode == evx::attacker::RelayMode::Bridge);
    const auto on = preset("wired_on");
    CHECK(on.world.topology == Topology::CrossRelay);
    CHECK(on.world.peer.kind == PeerKind::Wired);
    REQUIRE(on.attack_script);
    CHECK(*on.attack_script == evx::attacker::AttackScript::standard());
    CHECK(preset("lns_2m_ac").world.peer.kind == PeerKind::Wireless);
    for (const auto& s : all) {
        CHECK(s.runs == 1000);
        CHECK(s.world.guard_enabled);
        CHECK_NOTHROW(s.validate());
        CHECK(is_preset(s.name));
    }
    CHECK_FALSE(is_preset("nope"));
    try {
        preset("nope");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "nope");
    }
}

// ------------------------------------------------------------------ scenario files

TEST_CASE("every preset survives a write/parse round trip") {
    for (const auto& s : list_presets()) {
        std::ostringstream os;
        write_scenario(os, s);
        CHECK(parse(os.str()) == s);
    }
}

TEST_CASE("a customised scenario survives a round trip") {
    auto s = preset("wifi_2m");
    s.name = "custom";
    s.world.peer.kind = PeerKind::Custom;
    s.world.peer.custom = evx::netsim::LatencyModel::jittered(0.123456789e-3, 0.0000314e-3);
    s.world.guard.k = 17;
    s.world.guard.N = 2;
    s.world.guard.early_abort = false;
    s.world.evasion = {evx::attacker::EvasionKind::EarlyGuess, 2};
    s.world.bidirectional = true;
    s.world.victim.soc = 0.123;
    s.attack_script = evx::attacker::AttackScript{{{evx::attacker::ActionKind::SetDischargeSchedule, 0, 12.5},
                                                   {evx::attacker::ActionKind::PlugAttackerEv, 1.5, 0},
                                                   {evx::attacker::ActionKind::Unplug, 30, 0}}};
    s.runs = 3;
    s.seed = 99;
    std::ostringstream os;
    write_scenario(os, s);
    CHECK(parse(os.str()) == s);
}

TEST_CASE("a file may start from a preset and override single keys") {
    const auto s = parse("[scenario]\nbase = wired_on\nname = mine\nruns = 5\n[guard]\nenabled = false\n");
    auto want = preset("wired_on");
    want.name = "mine";
    want.runs = 5;
    want.world.guard_enabled = false;
    CHECK(s == want);
}

TEST_CASE("config errors name the offending field") {
    CHECK(field_of("[scenario]\nname = x\nruns = -3\n") == "scenario.runs");
    CHECK(field_of("[scenario]\nname = x\nruns = 0\n") == "scenario.runs");
    CHECK(field_of("[scenario]\nname = x\ncolour = red\n") == "scenario.colour");
    CHECK(field_of("[scenario]\nname = x\ntopology = ring\n") == "scenario.topology");
    CHECK(field_of("[scenario]\nbase = nope\n") == "nope");
    CHECK(field_of("[scenario]\nname = x\n[guard]\nmu_max = fast\n") == "guard.mu_max");
    CHECK(field_of("[scenario]\nname = x\n[guard]\nk = 0\n") == "guard");
    CHECK(field_of("[scenario]\nname = x\n[victim]\nsoc = 1.5\n") == "victim.soc");
    CHECK(field_of("[scenario]\nname = x\n[attacker]\nscript = standard\n") == "attacker.script");
    CHECK(field_of("[scenario]\nbase = wired_on\n[attacker]\nscript = fly:1\n") == "attacker.script");
    CHECK(field_of("[scenario]\nbase = wired_on\n[attacker]\nscript = send_stop_to_victim_evse:1\n") ==
          "attacker.script");
    CHECK(field_of("[scenario]\nname = x\n[nonsense]\nkey = 1\n") == "nonsense.key");
    CHECK(field_of("[scenario]\nname = x\n[guard]\nenabled = perhaps\n") == "guard.enabled");
    CHECK(field_of("[scenario]\nbase = wired_on\n[peer_link]\nbase_delay = 0.001\n") == "peer_link.base_delay");
    CHECK(field_of("[scenario]\nbase = wifi_2m\n[peer_link]\ndistance_m = 5\n") == "peer_link.distance_m");
}

// ------------------------------------------------------------------ statistics

TEST_CASE("nearest-rank percentile agrees with a sort-based oracle") {
    evx::netsim::Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.uniform_below(300);
        std::vector<double> xs(n);
        for (auto& x : xs) x = rng.uniform01();
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        // Smallest value with at least 99% of the sample at or below it.
        double want = sorted.back();
        for (double v : sorted) {
            const auto at_or_below = std::count_if(xs.begin(), xs.end(), [v](double y) { return y <= v; });
            if (100.0 * static_cast<double>(at_or_below) >= 99.0 * static_cast<double>(n)) {
                want = v;
                break;
            }
        }
        CHECK(percentile_nearest_rank(xs, 99.0) == want);
    }
    const std::vector<double> ten{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    CHECK(percentile_nearest_rank(ten, 50.0) == 5);
    CHECK(percentile_nearest_rank(ten, 100.0) == 10);
    CHECK_THROWS_AS(percentile_nearest_rank(std::vector<double>{}, 99.0), evx::guard::EmptyInput);
}

TEST_CASE("aggregate rates") {
    std::vector<RunRecord> runs(4);
    runs[0].verdict = Outcome::Accept;
    runs[1].verdict = Outcome::TimingAlert;
    runs[2].verdict = Outcome::IntegrityAlert;
    runs[3].verdict = Outcome::TimingAlert;
    for (std::size_t i = 0; i < runs.size(); ++i) runs[i].mu = 1e-3 * static_cast<double>(i + 1);

    const auto atk = aggregate(runs, true);
    CHECK(atk.detection_rate == 0.75);
    CHECK(atk.miss_rate == 0.25);
    CHECK(atk.detection_rate + atk.miss_rate == 1.0);
    CHECK(atk.fp_rate == 0.0);
    CHECK(atk.mean_mu == doctest::Approx(2.5e-3));
    CHECK(atk.p99_mu == 4e-3);
    CHECK(atk.outcomes.at(Outcome::TimingAlert) == 2);

    const auto legit = aggregate(runs, false);
    CHECK(legit.fp_rate == 0.75);
    CHECK(legit.detection_rate == 0.0);
}

// ------------------------------------------------------------------ running

TEST_CASE("wired: no false positives") {
    auto s = preset("wired");
    s.runs = 50;
    const auto r = run_scenario(s);
    CHECK(r.aggregate.fp_rate == 0.0);
    CHECK(r.aggregate.outcomes.at(Outcome::Accept) == 50);
    for (const auto& run : r.runs) {
        CHECK(run.guard_ran);
        CHECK(run.mu < 2e-3);
        CHECK(run.violations == 0);
        CHECK(run.billed.at("V-001") == run.victim_battery_delta);
    }
}

TEST_CASE("wifi_2m cross relay: every attack detected") {
    auto s = preset("wifi_2m");
    s.runs = 50;
    const auto r = run_scenario(s);
    CHECK(r.aggregate.detection_rate == 1.0);
    CHECK(r.aggregate.miss_rate == 0.0);
    for (const auto& run : r.runs) CHECK(run.verdict == Outcome::TimingAlert);
}

TEST_CASE("guard off: cross relay bills the victim for the attacker's energy") {
    auto s = preset("wired_on");
    s.runs = 2;
    s.world.guard_enabled = false;
    const auto r = run_scenario(s);
    for (const auto& run : r.runs) {
        CHECK_FALSE(run.guard_ran);
        CHECK(run.verdict == Outcome::Accept);
        CHECK(run.mu == 0.0);
        CHECK(run.billed.at("V-001") == run.attacker_battery_delta);
        CHECK(run.attacker_battery_delta > 0);
    }
    bool has_victim_row = false;
    for (const auto& e : r.ledger.entries())
        if (e.contract_id == "V-001" && e.reading.evse_id == "EVSE-B") has_victim_row = true;
    CHECK(has_victim_row);
}

TEST_CASE("emit_report writes one row per run and valid verdicts") {
    auto s = preset("wired");
    s.runs = 1000;
    s.world.dwell = 5.0;
    const auto r = run_scenario(s);
    const auto dir = scratch("emit");
    const auto files = emit_report(r, ReportFormat::Csv, dir);
    REQUIRE(files.size() == 3);

    const auto rows = lines(slurp(dir / "wired_runs.csv"));
    REQUIRE(rows.size() == 1001);
    CHECK(rows[0].rfind("run_id,mu_s,sigma_s,verdict", 0) == 0);
    const std::set<std::string> allowed{"Accept", "TimingAlert", "IntegrityAlert", "Timeout"};
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::istringstream row(rows[i]);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() >= 4);
        CHECK(cells[0] == std::to_string(i - 1));
        CHECK(allowed.count(cells[3]) == 1);
    }

    const auto agg = lines(slurp(dir / "wired_aggregate.csv"));
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].rfind("scenario,mean_mu,p99_mu,mean_sigma,p99_sigma,detection_rate,fp_rate", 0) == 0);
    CHECK(agg[1].rfind("wired,", 0) == 0);

    const auto ledger = lines(slurp(dir / "wired_ledger.csv"));
    CHECK(ledger[0] == "session_id,contract_id,timestamp,energy_kwh");

    const auto text = emit_report(r, ReportFormat::Text, dir);
    REQUIRE(text.size() == 1);
    const auto summary = slurp(text[0]);
    CHECK(summary.find("wired") != std::string::npos);
    CHECK(summary.find("fp rate") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("emit_report into an unwritable location raises IoError") {
    auto s = preset("wired");
    s.runs = 1;
    s.world.dwell = 1.0;
    const auto r = run_scenario(s);
    const auto file = scratch("blocker");
    std::ofstream(file) << "x";
    CHECK_THROWS_AS(emit_report(r, ReportFormat::Csv, file / "sub"), IoError);
    fs::remove_all(file);
}

TEST_CASE("same seed, byte-identical output") {
    auto s = preset("wifi_adhoc");
    s.runs = 20;
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    CHECK(runs_csv(a) == runs_csv(b));
    CHECK(aggregate_csv(a) == aggregate_csv(b));
    s.seed = 2;
    CHECK(runs_csv(run_scenario(s)) != runs_csv(a));
}

TEST_CASE("run i of a batch equals a lone run with seed + i") {
    auto s = preset("wired");
    s.runs = 4;
    s.seed = 40;
    s.world.dwell = 3.0;
    const auto batch = run_scenario(s);
    const auto lone = run_once(s, 3);
    CHECK(lone.seed == 43);
    CHECK(lone.mu == batch.runs[3].mu);
    CHECK(lone.sigma == batch.runs[3].sigma);
    CHECK(lone.metered == batch.runs[3].metered);
}
