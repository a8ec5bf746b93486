#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evx/power/energy.hpp"

namespace evx::power {

class UnboundSession : public std::runtime_error {
public:
    explicit UnboundSession(const std::string& evse)
        : std::runtime_error("no contract bound to the session at " + evse) {}
};

struct SessionBinding {
    std::uint64_t session_id = 0;
    std::string contract_id;
};

struct LedgerEntry {
    std::uint64_t session_id = 0;
    std::string contract_id;
    MeterReading reading;
};

/// Net energy per contract. Positive means the contract pays for energy
/// received, negative means it is credited for energy sold to the grid.
class BillingLedger {
public:
    WattSeconds billed(const std::string& contract_id) const;
    WattSeconds total() const;
    const std::map<std::string, WattSeconds>& accounts() const { return accounts_; }
    const std::vector<LedgerEntry>& entries() const { return entries_; }

    /// session_id,contract_id,timestamp,energy_kwh with 6-decimal fixed output.
    void write_csv(std::ostream& out) const;

private:
    friend void bill(BillingLedger&, const SessionBinding*, const MeterReading&);
    std::map<std::string, WattSeconds> accounts_;
    std::vector<LedgerEntry> entries_;
};

/// Charges `reading` to the bound contract. Throws UnboundSession when
/// `binding` is null.
void bill(BillingLedger& ledger, const SessionBinding* binding, const MeterReading& reading);

/// Back-end shared by all EVSEs: contract registry, per-EVSE session bindings,
/// meter totals and the billing ledger.
class ControlCenter {
public:
    void register_contract(const std::string& contract_id, bool valid);
    bool contract_valid(const std::string& contract_id) const;

    void bind(const std::string& evse_id, SessionBinding binding);
    void release(const std::string& evse_id);
    const SessionBinding* binding(const std::string& evse_id) const;

    /// Adds the reading to the EVSE's meter total and bills the bound contract.
    void record(const MeterReading& reading);

    WattSeconds metered(const std::string& evse_id) const;
    const std::map<std::string, WattSeconds>& meter_totals() const { return meters_; }
    const BillingLedger& ledger() const { return ledger_; }

private:
    std::map<std::string, bool> contracts_;
    std::map<std::string, SessionBinding> bindings_;
    std::map<std::string, WattSeconds> meters_;
    BillingLedger ledger_;
};

}  // namespace evx::power
