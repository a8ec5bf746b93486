#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "evx/session/messages.hpp"

namespace evx::power {
class ControlCenter;
}

namespace evx::session {

/// Session phases in the only order they may be visited (Stopped is reachable
/// from any phase on abort, Unplugged from any phase on physical unplug).
enum class Phase : std::uint8_t {
    Unplugged,
    Paired,
    Discovered,
    DistanceBounding,
    Secured,
    SetUp,
    Authorized,
    ParamsAgreed,
    Charging,
    Stopped,
};

std::string to_string(Phase p);

struct SessionState {
    Phase phase = Phase::Unplugged;
    std::uint64_t session_id = 0;
    Address peer_address{};
    std::optional<ChargeSchedule> agreed;
    /// EVCC: power action whose PowerDeliveryRes is still outstanding.
    std::optional<PowerAction> pending_power;
    /// SECC: contract bound by a successful authorization.
    std::string contract_id;
    /// Why the session went to Stopped, empty for an orderly stop.
    std::string abort_reason;
    /// Highest phase ever reached before Stopped/Unplugged.
    Phase furthest = Phase::Unplugged;
};

// Local (non-message) inputs.
struct PlugIn {};
struct Unplug {};
struct BeginDistanceBounding {};
/// Secure channel established without the distance-bounding guard.
struct ChannelUp {};
struct GuardVerdict {
    bool accepted = false;
    std::string outcome;
};
struct StopRequested {};
struct TamperDetected {};
/// Secure-channel setup failed (e.g. InvalidCertificate).
struct ChannelFailed {
    std::string reason;
};

using SessionInput = std::variant<PlugIn, Unplug, BeginDistanceBounding, ChannelUp, GuardVerdict,
                                  StopRequested, TamperDetected, ChannelFailed, V2GMessage>;

std::string describe(const SessionInput& in);

class ProtocolViolation : public std::runtime_error {
public:
    ProtocolViolation(Phase p, const std::string& input)
        : std::runtime_error("input " + input + " is illegal in phase " + to_string(p)),
          phase(p) {}
    Phase phase;
};

class NotSecured : public std::runtime_error {
public:
    NotSecured() : std::runtime_error("authorization requested before the secure channel") {}
};

struct StepResult {
    SessionState state;
    std::vector<V2GMessage> out;
};

struct EvccProfile {
    std::string evcc_id;
    std::string contract_id;
    ChargeSchedule requested;
};

struct SeccProfile {
    std::string evse_id;
    Address address{};
    std::uint16_t port = 15118;
    std::int64_t max_power_w = 22000;
    bool bidirectional = false;
    /// Decides AuthorizationReq. Called only from phase SetUp.
    std::function<AuthorizationRes(const SessionState&, const AuthorizationReq&)> authorizer;
    /// Source of fresh session ids.
    std::function<std::uint64_t()> new_session_id;
};

/// EV-side transition. Throws ProtocolViolation for inputs illegal in the
/// current phase; the caller's state is not modified in that case.
StepResult evcc_step(const SessionState& state, const SessionInput& input, const EvccProfile& profile);

/// Supply-equipment-side transition; same contract as evcc_step.
StepResult secc_step(const SessionState& state, const SessionInput& input, const SeccProfile& profile);

/// Station policy: accept any well-formed schedule, clamping power to the
/// station limit and refusing discharge on unidirectional stations.
ChargeSchedule accept_schedule(const ChargeSchedule& requested, const SeccProfile& profile);

/// Plug-and-Charge authorization at the control center. Binds `evse_id` to the
/// contract on success. Throws NotSecured before the channel is up.
AuthorizationRes authorize(power::ControlCenter& cc, const SessionState& secc,
                           const std::string& evse_id, const AuthorizationReq& req);

}  // namespace evx::session
