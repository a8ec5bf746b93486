#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evx/attacker/relay.hpp"
#include "evx/guard/protocol.hpp"
#include "evx/netsim/router.hpp"
#include "evx/netsim/simulator.hpp"
#include "evx/power/billing.hpp"
#include "evx/session/channel.hpp"
#include "evx/session/state_machine.hpp"

namespace evx::harness {

enum class Topology { LegitDirect, DevicesBridging, CrossRelay };

/// Link between the two relay devices.
enum class PeerKind { Wired, WifiRouter5cm, WifiRouter2m, WifiAdhoc, Wireless, Custom };

struct PeerLink {
    PeerKind kind = PeerKind::Wired;
    /// Used by PeerKind::Wireless (one direct radio hop).
    netsim::WirelessPreset wireless;
    /// Used by PeerKind::Custom.
    netsim::LatencyModel custom;

    bool operator==(const PeerLink&) const;
};

std::string to_string(Topology t);
std::string to_string(PeerKind k);

struct EvParams {
    std::string contract_id;
    double capacity_kwh = 60.0;
    double soc = 0.3;
    double target_kwh = 30.0;
    double max_kw = 11.0;
    bool operator==(const EvParams&) const = default;
};

/// Everything one simulated run needs except the seed.
struct WorldConfig {
    Topology topology = Topology::LegitDirect;
    /// Device behaviour for DevicesBridging (Off or Bridge).
    attacker::RelayMode device_mode = attacker::RelayMode::Bridge;
    PeerLink peer;
    bool guard_enabled = true;
    guard::DBConfig guard;
    attacker::Evasion evasion;

    EvParams victim{"V-001", 60.0, 0.3, 30.0, 11.0};
    EvParams attacker{"A-001", 60.0, 0.3, 40.0, 11.0};

    double station_max_kw = 22.0;
    bool bidirectional = false;
    double metering_interval = 1.0;
    double proc_delay = attacker::kDefaultProcDelay;
    double se_turnaround = 0.02e-3;
    netsim::LatencyModel plc = netsim::calibration::plc_cable();

    /// Seconds the victim leaves the car charging before coming back to stop it.
    double dwell = 1800.0;
    /// Seconds between the end of a session and the owner unplugging.
    double unplug_delay = 10.0;
    /// Hard stop for the event loop, simulated seconds.
    double horizon = 4.0 * 3600.0;

    bool operator==(const WorldConfig&) const = default;
};

/// Peer-link model for one hop of the given preset kind; router presets use
/// two such hops.
netsim::LatencyModel peer_hop_model(const PeerLink& peer);

class World;

/// An EV with its communication controller (EVCC). Runs the guard as the
/// verifier when enabled.
class EvNode : public netsim::Node {
public:
    EvNode(std::string label, const EvParams& params, bool run_guard, guard::DBConfig guard,
           const session::TrustStore& trust);

    void attach(netsim::LinkId port) { port_ = port; }
    void plug(netsim::Simulator& sim);
    void request_stop(netsim::Simulator& sim);
    void set_requested(session::ChargeSchedule s) { profile_.requested = s; }

    void on_frame(netsim::Simulator& sim, const netsim::Frame& frame) override;
    void on_timer(netsim::Simulator& sim, std::uint64_t token) override;
    void on_link_state(netsim::Simulator& sim, netsim::LinkId link, bool up) override;
    std::string name() const override { return label_; }

    const session::SessionState& state() const { return state_; }
    session::Phase phase() const { return state_.phase; }
    power::Battery& battery() { return battery_; }
    const power::Battery& battery() const { return battery_; }
    const std::string& contract_id() const { return profile_.contract_id; }
    bool plugged() const { return plugged_; }

    /// Verdict of the most recent guard execution.
    const std::optional<guard::DBVerdict>& verdict() const { return verdict_; }
    double guard_duration() const { return guard_duration_; }
    const std::vector<std::string>& violations() const { return violations_; }

    std::function<void(netsim::Simulator&, EvNode&, session::Phase)> on_phase;

private:
    void feed(netsim::Simulator& sim, const session::SessionInput& in);
    void send_msg(netsim::Simulator& sim, const session::V2GMessage& msg);
    void guard_step(netsim::Simulator& sim, const guard::Verifier::Step& step);
    void conclude_guard(netsim::Simulator& sim);

    std::string label_;
    session::EvccProfile profile_;
    power::Battery battery_;
    bool run_guard_;
    guard::DBConfig guard_config_;
    const session::TrustStore* trust_;
    session::ContractCredential cred_;
    std::optional<session::ChannelHandshake> handshake_;
    std::unique_ptr<guard::Verifier> verifier_;
    session::SessionState state_;
    netsim::LinkId port_ = 0;
    bool plugged_ = false;
    std::uint64_t epoch_ = 0;
    std::optional<guard::DBVerdict> verdict_;
    double guard_duration_ = 0.0;
    std::vector<std::string> violations_;
};

/// A charging column with its communication controller (SECC) and meter.
class SeNode : public netsim::Node {
public:
    SeNode(std::string evse_id, const WorldConfig& cfg, const session::TrustStore& trust,
           power::ControlCenter& cc, std::uint64_t session_base);

    void attach(netsim::LinkId port) { port_ = port; }
    /// Battery of the EV physically connected to this column's cable.
    void set_attached(power::Battery* battery) { attached_ = battery; }

    void on_frame(netsim::Simulator& sim, const netsim::Frame& frame) override;
    void on_timer(netsim::Simulator& sim, std::uint64_t token) override;
    void on_link_state(netsim::Simulator& sim, netsim::LinkId link, bool up) override;
    std::string name() const override { return evse_.id; }

    const session::SessionState& state() const { return state_; }
    const power::Evse& evse() const { return evse_; }
    const std::vector<std::string>& violations() const { return violations_; }

    std::function<void(netsim::Simulator&, SeNode&, session::Phase)> on_phase;

private:
    void feed(netsim::Simulator& sim, const session::SessionInput& in);
    void send_msg(netsim::Simulator& sim, const session::V2GMessage& msg);
    void energize(netsim::Simulator& sim);
    void deenergize(netsim::Simulator& sim);
    void meter(netsim::Simulator& sim, bool send_receipt);
    void reset_session();

    power::Evse evse_;
    const WorldConfig* cfg_;
    const session::TrustStore* trust_;
    power::ControlCenter* cc_;
    session::SeccProfile profile_;
    session::SessionState state_;
    std::optional<session::ChannelHandshake> handshake_;
    std::unique_ptr<guard::Prover> prover_;
    power::Battery* attached_ = nullptr;
    netsim::LinkId port_ = 0;
    double last_tick_ = 0.0;
    std::uint64_t meter_epoch_ = 0;
    std::uint64_t next_session_;
    std::vector<std::string> violations_;
};

struct TraceEntry {
    double time = 0.0;
    std::string text;
};

/// The two-column parking lot: two EVs, two EVSEs, the control center, and
/// (depending on the topology) two relay devices with their peer link.
/// EV A / EVSE A belong to the victim, EV B / EVSE B to the attacker.
///
/// Owner behaviour is built in: the victim plugs in at t = 0, returns `dwell`
/// seconds after charging began, stops and unplugs. Attacker behaviour comes
/// from an attack script (see attacker::run_evexchange).
class World : public netsim::Node {
public:
    World(const WorldConfig& cfg, std::uint64_t seed);

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    netsim::Simulator& sim() { return sim_; }
    const WorldConfig& config() const { return cfg_; }
    power::ControlCenter& control_center() { return cc_; }
    const power::ControlCenter& control_center() const { return cc_; }

    EvNode& victim() { return *ev_a_; }
    EvNode& attacker() { return *ev_b_; }
    SeNode& evse_a() { return *se_a_; }
    SeNode& evse_b() { return *se_b_; }
    attacker::RelayDevice* device_a() { return dev_a_.get(); }
    attacker::RelayDevice* device_b() { return dev_b_.get(); }

    void plug(EvNode& ev);
    void unplug(EvNode& ev);

    /// Runs `fn` after `delay` simulated seconds.
    void after(double delay, std::function<void()> fn);

    /// Starts the victim's plan and runs until every EV has left or the
    /// horizon passes.
    void run();

    void note(std::string text);
    const std::vector<TraceEntry>& trace() const { return trace_; }

    /// Hooks for the attack script; called after the built-in owner logic.
    std::function<void(session::Phase)> victim_phase_hook;
    std::function<void(session::Phase)> attacker_phase_hook;
    std::function<void()> victim_left_hook;

    void on_frame(netsim::Simulator&, const netsim::Frame&) override {}
    void on_timer(netsim::Simulator& sim, std::uint64_t token) override;
    std::string name() const override { return "director"; }

    /// Protocol violations recorded by any node.
    std::vector<std::string> violations() const;

private:
    struct Cable {
        std::vector<netsim::LinkId> links;
    };
    void build();
    void victim_phase(session::Phase p);
    void maybe_finish();

    WorldConfig cfg_;
    netsim::Simulator sim_;
    session::TrustStore trust_;
    power::ControlCenter cc_;
    std::unique_ptr<EvNode> ev_a_;
    std::unique_ptr<EvNode> ev_b_;
    std::unique_ptr<SeNode> se_a_;
    std::unique_ptr<SeNode> se_b_;
    std::unique_ptr<attacker::RelayDevice> dev_a_;
    std::unique_ptr<attacker::RelayDevice> dev_b_;
    std::unique_ptr<netsim::Router> router_;
    std::map<const EvNode*, Cable> cables_;
    std::map<std::uint64_t, std::function<void()>> pending_;
    std::uint64_t next_token_ = 0;
    bool victim_returned_ = false;
    bool victim_leaving_ = false;
    std::vector<TraceEntry> trace_;
};

}  // namespace evx::harness
