#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evx/guard/guard.hpp"
#include "evx/harness/scenario.hpp"
#include "evx/power/billing.hpp"

namespace evx::harness {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunRecord {
    std::uint32_t run_id = 0;
    std::uint64_t seed = 0;
    /// Victim's guard verdict. Accept with mu = sigma = 0 when the guard is off.
    guard::Outcome verdict = guard::Outcome::Accept;
    double mu = 0.0;
    double sigma = 0.0;
    bool guard_ran = false;
    double guard_duration = 0.0;
    /// Energy through each column's meter and into each battery.
    std::map<std::string, power::WattSeconds> metered;
    power::WattSeconds victim_battery_delta = 0;
    power::WattSeconds attacker_battery_delta = 0;
    std::map<std::string, power::WattSeconds> billed;
    std::uint8_t victim_abuse = 0;
    std::uint8_t attacker_abuse = 0;
    std::size_t violations = 0;
    double end_time = 0.0;
};

struct Aggregate {
    double mean_mu = 0.0;
    double p99_mu = 0.0;
    double mean_sigma = 0.0;
    double p99_sigma = 0.0;
    /// Share of attack runs that raised any alert.
    double detection_rate = 0.0;
    double miss_rate = 0.0;
    /// Share of legitimate runs that raised any alert.
    double fp_rate = 0.0;
    std::map<guard::Outcome, std::uint32_t> outcomes;
};

struct ScenarioReport {
    Scenario scenario;
    std::vector<RunRecord> runs;
    Aggregate aggregate;
    /// Ledger of run 0.
    power::BillingLedger ledger;
    /// Union of abuse flags over all runs.
    std::uint8_t victim_abuse = 0;
    std::uint8_t attacker_abuse = 0;
};

/// One seeded simulation of `s` with seed s.seed + run_index.
RunRecord run_once(const Scenario& s, std::uint32_t run_index, power::BillingLedger* ledger_out = nullptr);

/// Executes every run in index order and aggregates. Throws ConfigError.
ScenarioReport run_scenario(const Scenario& s);

/// Nearest-rank percentile (p in (0, 100]). Throws guard::EmptyInput.
double percentile_nearest_rank(std::span<const double> values, double p);

Aggregate aggregate(std::span<const RunRecord> runs, bool attack);

enum class ReportFormat { Csv, Text };

/// Writes <name>_runs.csv, <name>_aggregate.csv and <name>_ledger.csv (csv)
/// or <name>_summary.txt (text) into `dir`, returning the paths written.
/// Throws IoError.
std::vector<std::filesystem::path> emit_report(const ScenarioReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);

std::string runs_csv(const ScenarioReport& report);
std::string aggregate_csv(const ScenarioReport& report);
std::string summary_text(const ScenarioReport& report);

}  // namespace evx::harness
