#include "evx/power/billing.hpp"

#include <cstdio>

namespace evx::power {

WattSeconds BillingLedger::billed(const std::string& contract_id) const {
    auto it = accounts_.find(contract_id);
    return it == accounts_.end() ? 0 : it->second;
}

WattSeconds BillingLedger::total() const {
    WattSeconds sum = 0;
    for (const auto& [_, ws] : accounts_) sum += ws;
    return sum;
}

void BillingLedger::write_csv(std::ostream& out) const {
    out << "session_id,contract_id,timestamp,energy_kwh\n";
    char buf[64];
    for (const auto& e : entries_) {
        out << e.session_id << ',' << e.contract_id << ',';
        std::snprintf(buf, sizeof buf, "%.6f,%.6f", e.reading.timestamp, e.reading.energy_kwh());
        out << buf << '\n';
    }
}

void bill(BillingLedger& ledger, const SessionBinding* binding, const MeterReading& reading) {
    if (binding == nullptr) throw UnboundSession(reading.evse_id);
    ledger.accounts_[binding->contract_id] += reading.energy;
    ledger.entries_.push_back(LedgerEntry{binding->session_id, binding->contract_id, reading});
}

void ControlCenter::register_contract(const std::string& contract_id, bool valid) {
    contracts_[contract_id] = valid;
}

bool ControlCenter::contract_valid(const std::string& contract_id) const {
    auto it = contracts_.find(contract_id);
    return it != contracts_.end() && it->second;
}

void ControlCenter::bind(const std::string& evse_id, SessionBinding binding) {
    bindings_[evse_id] = std::move(binding);
}

void ControlCenter::release(const std::string& evse_id) { bindings_.erase(evse_id); }

const SessionBinding* ControlCenter::binding(const std::string& evse_id) const {
    auto it = bindings_.find(evse_id);
    return it == bindings_.end() ? nullptr : &it->second;
}

void ControlCenter::record(const MeterReading& reading) {
    bill(ledger_, binding(reading.evse_id), reading);
    meters_[reading.evse_id] += reading.energy;
}

WattSeconds ControlCenter::metered(const std::string& evse_id) const {
    auto it = meters_.find(evse_id);
    return it == meters_.end() ? 0 : it->second;
}

}  // namespace evx::power
