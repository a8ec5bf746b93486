#include "evx/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evx/attacker/choreography.hpp"

namespace evx::harness {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

RunRecord run_once(const Scenario& s, std::uint32_t run_index, power::BillingLedger* ledger_out) {
    RunRecord rec;
    rec.run_id = run_index;
    rec.seed = s.seed + run_index;

    World world(s.world, rec.seed);
    const power::WattSeconds victim_start = world.victim().battery().stored;
    const power::WattSeconds attacker_start = world.attacker().battery().stored;
    if (s.attack_script) {
        attacker::run_evexchange(*s.attack_script, world);
    } else {
        world.run();
    }

    if (const auto& v = world.victim().verdict()) {
        rec.guard_ran = true;
        rec.verdict = v->outcome;
        rec.mu = v->mu;
        rec.sigma = v->sigma;
        rec.guard_duration = world.victim().guard_duration();
    }
    const auto& cc = world.control_center();
    rec.metered = cc.meter_totals();
    rec.billed = cc.ledger().accounts();
    rec.victim_battery_delta = world.victim().battery().stored - victim_start;
    rec.attacker_battery_delta = world.attacker().battery().stored - attacker_start;
    rec.victim_abuse = world.victim().battery().abuse_flags;
    rec.attacker_abuse = world.attacker().battery().abuse_flags;
    rec.violations = world.violations().size();
    rec.end_time = world.sim().now();
    if (ledger_out) *ledger_out = cc.ledger();
    return rec;
}

double percentile_nearest_rank(std::span<const double> values, double p) {
    if (values.empty()) throw guard::EmptyInput();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

Aggregate aggregate(std::span<const RunRecord> runs, bool attack) {
    Aggregate a;
    if (runs.empty()) return a;
    std::vector<double> mus;
    std::vector<double> sigmas;
    std::uint32_t alerts = 0;
    for (const auto& r : runs) {
        mus.push_back(r.mu);
        sigmas.push_back(r.sigma);
        ++a.outcomes[r.verdict];
        if (r.verdict != guard::Outcome::Accept) ++alerts;
    }
    const double n = static_cast<double>(runs.size());
    double sum_mu = 0.0;
    double sum_sigma = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        sum_mu += mus[i];
        sum_sigma += sigmas[i];
    }
    a.mean_mu = sum_mu / n;
    a.mean_sigma = sum_sigma / n;
    a.p99_mu = percentile_nearest_rank(mus, 99.0);
    a.p99_sigma = percentile_nearest_rank(sigmas, 99.0);
    const double alert_rate = alerts / n;
    if (attack) {
        a.detection_rate = alert_rate;
        a.miss_rate = 1.0 - alert_rate;
    } else {
        a.fp_rate = alert_rate;
    }
    return a;
}

ScenarioReport run_scenario(const Scenario& s) {
    s.validate();
    ScenarioReport report;
    report.scenario = s;
    report.runs.reserve(s.runs);
    for (std::uint32_t i = 0; i < s.runs; ++i) {
        report.runs.push_back(run_once(s, i, i == 0 ? &report.ledger : nullptr));
        report.victim_abuse |= report.runs.back().victim_abuse;
        report.attacker_abuse |= report.runs.back().attacker_abuse;
    }
    report.aggregate = aggregate(report.runs, s.is_attack());
    return report;
}

std::string runs_csv(const ScenarioReport& report) {
    std::string out = "run_id,mu_s,sigma_s,verdict\n";
    for (const auto& r : report.runs) {
        out += std::to_string(r.run_id) + "," + fixed(r.mu, 9) + "," + fixed(r.sigma, 9) + "," +
               guard::to_string(r.verdict) + "\n";
    }
    return out;
}

std::string aggregate_csv(const ScenarioReport& report) {
    const Aggregate& a = report.aggregate;
    return "scenario,mean_mu,p99_mu,mean_sigma,p99_sigma,detection_rate,fp_rate\n" + report.scenario.name + "," +
           fixed(a.mean_mu, 9) + "," + fixed(a.p99_mu, 9) + "," + fixed(a.mean_sigma, 9) + "," +
           fixed(a.p99_sigma, 9) + "," + fixed(a.detection_rate, 6) + "," + fixed(a.fp_rate, 6) + "\n";
}

std::string summary_text(const ScenarioReport& report) {
    const Scenario& s = report.scenario;
    const Aggregate& a = report.aggregate;
    std::ostringstream os;
    os << "scenario        " << s.name << "\n"
       << "topology        " << to_string(s.world.topology) << "\n"
       << "guard           " << (s.world.guard_enabled ? "on" : "off") << "\n"
       << "runs            " << report.runs.size() << " (seed " << s.seed << ")\n"
       << "mean mu         " << fixed(a.mean_mu * 1e3, 6) << " ms\n"
       << "p99 mu          " << fixed(a.p99_mu * 1e3, 6) << " ms\n"
       << "mean sigma      " << fixed(a.mean_sigma * 1e3, 6) << " ms\n"
       << "p99 sigma       " << fixed(a.p99_sigma * 1e3, 6) << " ms\n"
       << "detection rate  " << fixed(a.detection_rate, 6) << "\n"
       << "fp rate         " << fixed(a.fp_rate, 6) << "\n";
    for (guard::Outcome o : {guard::Outcome::Accept, guard::Outcome::TimingAlert, guard::Outcome::IntegrityAlert,
                             guard::Outcome::Timeout}) {
        auto it = a.outcomes.find(o);
        const std::string label = guard::to_string(o);
        os << "  " << label << std::string(16 - label.size(), ' ') << (it == a.outcomes.end() ? 0 : it->second)
           << "\n";
    }
    os << "billing (run 0)\n";
    for (const auto& [contract, ws] : report.ledger.accounts()) {
        os << "  " << contract << "  " << fixed(power::ws_to_kwh(ws), 6) << " kWh\n";
    }
    os << "abuse flags     victim " << int(report.victim_abuse) << ", attacker " << int(report.attacker_abuse)
       << "\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_report(const ScenarioReport& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const std::string& name = report.scenario.name;
    std::vector<std::filesystem::path> written;
    if (format == ReportFormat::Text) {
        written.push_back(dir / (name + "_summary.txt"));
        write_file(written.back(), summary_text(report));
        return written;
    }
    written.push_back(dir / (name + "_runs.csv"));
    write_file(written.back(), runs_csv(report));
    written.push_back(dir / (name + "_aggregate.csv"));
    write_file(written.back(), aggregate_csv(report));

    std::ostringstream ledger;
    report.ledger.write_csv(ledger);
    written.push_back(dir / (name + "_ledger.csv"));
    write_file(written.back(), ledger.str());
    return written;
}

}  // namespace evx::harness
