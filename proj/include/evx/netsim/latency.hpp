#pragma once

#include <optional>
#include <string>

#include "evx/netsim/rng.hpp"

namespace evx::netsim {

/// Smallest delay any link can produce, in seconds.
inline constexpr double kMinDelay = 1e-6;

enum class LatencyKind { Constant, Jittered, Preset };

/// Radio propagation families the wireless presets are named after.
enum class PropagationModel { LogDistancePathLoss, LogNormalShadowing };

enum class WifiStandard { G80211, AC80211 };

struct WirelessPreset {
    PropagationModel propagation = PropagationModel::LogDistancePathLoss;
    double distance_m = 2.0;
    WifiStandard standard = WifiStandard::AC80211;
    bool operator==(const WirelessPreset&) const = default;
};

/// Delay distribution of one link. Preset models resolve to a jittered
/// gaussian through resolve_preset().
struct LatencyModel {
    LatencyKind kind = LatencyKind::Constant;
    double base_delay = 0.0;  // seconds
    double jitter_std = 0.0;  // seconds
    std::optional<WirelessPreset> preset;

    static LatencyModel constant(double base) {
        return {LatencyKind::Constant, base, 0.0, std::nullopt};
    }
    static LatencyModel jittered(double base, double jitter) {
        return {LatencyKind::Jittered, base, jitter, std::nullopt};
    }
    static LatencyModel wireless(WirelessPreset p) {
        return {LatencyKind::Preset, 0.0, 0.0, p};
    }

    /// Mean of the (unclamped) distribution.
    double mean() const;
    bool operator==(const LatencyModel&) const = default;
};

/// Calibrated defaults used throughout the lab. All of them are plain values
/// and every consumer accepts overrides.
namespace calibration {
inline constexpr double kPlcBase = 0.15e-3;
inline constexpr double kPlcJitter = 0.02e-3;
inline constexpr double kWifiHopBase = 1.5e-3;
inline constexpr double kWifiHopJitter = 0.4e-3;
inline constexpr double kAdhocBase = 1.2e-3;
inline constexpr double kAdhocJitter = 0.3e-3;
/// Ethernet between the two relay devices, including VXLAN encapsulation and
/// user-space forwarding on a small single-board computer.
inline constexpr double kWiredTunnelBase = 0.9e-3;
inline constexpr double kWiredTunnelJitter = 0.05e-3;
/// Extra base delay when the access point sits 2 m instead of 5 cm away.
inline constexpr double kRouterFarIncrement = 0.01e-3;

inline LatencyModel plc_cable() { return LatencyModel::jittered(kPlcBase, kPlcJitter); }
}  // namespace calibration

/// Base delay and jitter a wireless preset stands for.
LatencyModel resolve_preset(const WirelessPreset& preset);

/// Draws one delay. Always >= kMinDelay.
double sample_delay(const LatencyModel& model, Rng& rng);

std::string to_string(PropagationModel m);
std::string to_string(WifiStandard s);

}  // namespace evx::netsim
