#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>

#include "evx/guard/guard.hpp"
#include "evx/netsim/simulator.hpp"

namespace evx::attacker {

enum class RelayMode { Off, Bridge, CrossRelay };

enum class EvasionKind { None, EarlyGuess };

struct Evasion {
    EvasionKind kind = EvasionKind::None;
    /// Alphabet the guessed symbols are drawn from.
    std::uint32_t alphabet = 128;
    bool operator==(const Evasion&) const = default;
};

std::string to_string(RelayMode m);
std::string to_string(EvasionKind e);

/// Default per-device processing time of a bridging or relaying device.
inline constexpr double kDefaultProcDelay = 0.05e-3;

/// In-line device spliced into a charging cable. It owns an EV-side port, an
/// SE-side port and a port toward its peer device. Payload bytes are never
/// modified; secure-channel frames are not even inspected.
///
/// Off passes frames straight through, Bridge does the same after the local
/// processing delay, CrossRelay tunnels each EV-side frame to the peer's
/// SE-side port and each SE-side frame to the peer's EV-side port. The
/// processing delay is paid once per one-way trip, at the ingress device.
///
/// Frames whose egress port is down (nothing plugged there yet) are held and
/// flushed in arrival order once the port comes up.
class RelayDevice : public netsim::Node {
public:
    explicit RelayDevice(std::string label, RelayMode mode = RelayMode::Off,
                         double proc_delay = kDefaultProcDelay)
        : label_(std::move(label)), mode_(mode), proc_delay_(proc_delay) {}

    void attach(netsim::LinkId ev_port, netsim::LinkId se_port, std::optional<netsim::LinkId> peer_port) {
        ev_port_ = ev_port;
        se_port_ = se_port;
        peer_port_ = peer_port;
    }

    void set_mode(RelayMode m) { mode_ = m; }
    void set_evasion(Evasion e) { evasion_ = e; }
    RelayMode mode() const { return mode_; }
    const Evasion& evasion() const { return evasion_; }
    double proc_delay() const { return proc_delay_; }

    void on_frame(netsim::Simulator& sim, const netsim::Frame& frame) override;
    void on_link_state(netsim::Simulator& sim, netsim::LinkId link, bool up) override;
    std::string name() const override { return label_; }

    std::uint64_t forwarded() const { return forwarded_; }
    std::uint64_t fabricated() const { return fabricated_; }

private:
    friend std::optional<netsim::Frame> relay_forward(RelayDevice&, netsim::Simulator&,
                                                      const netsim::Frame&);
    struct Held {
        netsim::Bytes payload;
        netsim::SendOptions opts;
    };

    std::optional<netsim::Frame> emit(netsim::Simulator& sim, netsim::LinkId out, const netsim::Frame& in,
                                      double delay, std::uint32_t overlay);

    std::string label_;
    RelayMode mode_;
    double proc_delay_;
    Evasion evasion_;
    netsim::LinkId ev_port_ = 0;
    netsim::LinkId se_port_ = 0;
    std::optional<netsim::LinkId> peer_port_;
    std::deque<Held> held_ev_;
    std::deque<Held> held_se_;
    std::uint64_t forwarded_ = 0;
    std::uint64_t fabricated_ = 0;
};

/// Forwards one frame that arrived on one of the device's ports according to
/// its mode. Returns the frame as scheduled on the egress link, or nullopt if
/// it was held, consumed by an evasion strategy or dropped.
std::optional<netsim::Frame> relay_forward(RelayDevice& dev, netsim::Simulator& sim,
                                           const netsim::Frame& frame);

/// Symbol sent back to the EV instead of waiting for the real response:
/// uniform over the evasion alphabet, independent of what was observed.
guard::Symbol early_guess_respond(const RelayDevice& dev, guard::Symbol observed, netsim::Rng& rng);

}  // namespace evx::attacker
