#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace evx::power {

/// All energy is accounted in integer watt-seconds so sums never drift.
using WattSeconds = std::int64_t;

inline constexpr double kWattSecondsPerKwh = 3.6e6;

WattSeconds kwh_to_ws(double kwh);
double ws_to_kwh(WattSeconds ws);

enum class AbuseFlag : std::uint8_t {
    OverchargeCommanded = 1u << 0,
    DeepDischargeCommanded = 1u << 1,
};

struct Battery {
    WattSeconds capacity = 0;
    WattSeconds stored = 0;
    std::uint8_t abuse_flags = 0;

    static Battery from_kwh(double capacity_kwh, double soc);

    double soc() const {
        return capacity > 0 ? static_cast<double>(stored) / static_cast<double>(capacity) : 0.0;
    }
    bool has(AbuseFlag f) const { return (abuse_flags & static_cast<std::uint8_t>(f)) != 0; }
    void raise(AbuseFlag f) { abuse_flags |= static_cast<std::uint8_t>(f); }
};

struct MeterReading {
    std::string evse_id;
    /// Positive: delivered to the EV. Negative: drawn from the EV.
    WattSeconds energy = 0;
    double interval = 0.0;   // seconds
    double timestamp = 0.0;  // end of the interval, simulated seconds

    double energy_kwh() const { return ws_to_kwh(energy); }
    bool operator==(const MeterReading&) const = default;
};

/// Active power flow commanded by a charging session.
struct Delivery {
    std::int64_t power_w = 0;         // signed; negative discharges the EV
    WattSeconds energy_limit = 0;     // magnitude of the session's target energy
    WattSeconds transferred = 0;      // magnitude already moved in this session
};

struct Evse {
    std::string id;
    std::optional<Delivery> delivery;

    bool energized() const { return delivery.has_value(); }
};

class NotEnergized : public std::runtime_error {
public:
    explicit NotEnergized(const std::string& evse)
        : std::runtime_error("EVSE " + evse + " has no active delivery") {}
};

/// Moves energy over the physical cable for dt seconds between `evse` and the
/// battery of whichever EV is plugged into it.
///
/// The step is limited by the commanded power, the session's remaining target
/// energy and the battery bounds. Hitting a battery bound raises the matching
/// abuse flag instead of pushing soc outside [0, 1].
MeterReading tick_power(Evse& evse, Battery& attached, double dt, double now);

}  // namespace evx::power
