#include "evx/netsim/latency.hpp"

#include <algorithm>

namespace evx::netsim {

namespace {

// Per-standard MAC/PHY latency of one wireless hop.
double standard_base(WifiStandard s) {
    return s == WifiStandard::G80211 ? 1.6e-3 : 1.2e-3;
}

}  // namespace

LatencyModel resolve_preset(const WirelessPreset& preset) {
    const double d = std::max(0.0, preset.distance_m);
    // Retransmissions grow with path loss, so both families add a small
    // distance term; shadowing additionally widens the spread.
    double base = standard_base(preset.standard) + 0.01e-3 * d;
    double jitter = 0.0;
    switch (preset.propagation) {
        case PropagationModel::LogDistancePathLoss:
            jitter = 0.2e-3 + 0.005e-3 * d;
            break;
        case PropagationModel::LogNormalShadowing:
            jitter = 0.35e-3 + 0.01e-3 * d;
            break;
    }
    return LatencyModel::jittered(base, jitter);
}

double LatencyModel::mean() const {
    if (kind == LatencyKind::Preset && preset) {
        return resolve_preset(*preset).base_delay;
    }
    return base_delay;
}

double sample_delay(const LatencyModel& model, Rng& rng) {
    switch (model.kind) {
        case LatencyKind::Constant:
            return std::max(kMinDelay, model.base_delay);
        case LatencyKind::Jittered: {
            if (model.jitter_std <= 0.0) {
                return std::max(kMinDelay, model.base_delay);
            }
            return std::max(kMinDelay, model.base_delay + model.jitter_std * rng.gaussian());
        }
        case LatencyKind::Preset: {
            if (!model.preset) {
                return std::max(kMinDelay, model.base_delay);
            }
            return sample_delay(resolve_preset(*model.preset), rng);
        }
    }
    return kMinDelay;
}

std::string to_string(PropagationModel m) {
    return m == PropagationModel::LogDistancePathLoss ? "LDPL" : "LNS";
}

std::string to_string(WifiStandard s) {
    return s == WifiStandard::G80211 ? "802.11g" : "802.11ac";
}

}  // namespace evx::netsim
