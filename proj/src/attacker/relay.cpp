#include "evx/attacker/relay.hpp"

#include "evx/guard/protocol.hpp"

namespace evx::attacker {

namespace {

// Overlay ids on the peer link say which port of the peer the frame is for.
constexpr std::uint32_t kToPeerSe = 1;
constexpr std::uint32_t kToPeerEv = 2;

}  // namespace

std::string to_string(RelayMode m) {
    switch (m) {
        case RelayMode::Off: return "off";
        case RelayMode::Bridge: return "bridge";
        case RelayMode::CrossRelay: return "cross_relay";
    }
    return "?";
}

std::string to_string(EvasionKind e) {
    return e == EvasionKind::EarlyGuess ? "early_guess" : "none";
}

guard::Symbol early_guess_respond(const RelayDevice& dev, guard::Symbol /*observed*/, netsim::Rng& rng) {
    return static_cast<guard::Symbol>(rng.uniform_below(dev.evasion().alphabet));
}

std::optional<netsim::Frame> RelayDevice::emit(netsim::Simulator& sim, netsim::LinkId out,
                                               const netsim::Frame& in, double delay,
                                               std::uint32_t overlay) {
    netsim::SendOptions opts{delay, in.opaque, in.seal, overlay};
    if (!sim.link(out).up) {
        (out == ev_port_ ? held_ev_ : held_se_).push_back(Held{in.payload, opts});
        return std::nullopt;
    }
    ++forwarded_;
    return sim.send(out, id(), in.payload, opts);
}

std::optional<netsim::Frame> relay_forward(RelayDevice& dev, netsim::Simulator& sim,
                                           const netsim::Frame& frame) {
    const bool from_ev = frame.link == dev.ev_port_;
    const bool from_se = frame.link == dev.se_port_;
    const bool from_peer = dev.peer_port_ && frame.link == *dev.peer_port_;

    if (from_peer) {
        if (dev.mode_ != RelayMode::CrossRelay) return std::nullopt;
        if (frame.overlay == kToPeerEv) {
            // The fabricated answer already went out; the genuine one is dropped.
            if (dev.evasion_.kind == EvasionKind::EarlyGuess && !frame.opaque) {
                const auto f = guard::decode_exchange(frame.payload);
                if (f && f->tag == guard::kResponseTag) return std::nullopt;
            }
            return dev.emit(sim, dev.ev_port_, frame, 0.0, 0);
        }
        return dev.emit(sim, dev.se_port_, frame, 0.0, 0);
    }
    if (!from_ev && !from_se) return std::nullopt;

    switch (dev.mode_) {
        case RelayMode::Off:
            return dev.emit(sim, from_ev ? dev.se_port_ : dev.ev_port_, frame, 0.0, 0);
        case RelayMode::Bridge:
            return dev.emit(sim, from_ev ? dev.se_port_ : dev.ev_port_, frame, dev.proc_delay_, 0);
        case RelayMode::CrossRelay:
            break;
    }
    if (!dev.peer_port_) return std::nullopt;

    if (from_ev && dev.evasion_.kind == EvasionKind::EarlyGuess && !frame.opaque) {
        const auto f = guard::decode_exchange(frame.payload);
        if (f && f->tag == guard::kChallengeTag) {
            const guard::Symbol guess = early_guess_respond(dev, f->symbol, sim.rng());
            netsim::Frame fake = frame;
            fake.payload = guard::encode_exchange({guard::kResponseTag, f->index, guess});
            ++dev.fabricated_;
            dev.emit(sim, dev.ev_port_, fake, dev.proc_delay_, 0);
        }
    }
    return dev.emit(sim, *dev.peer_port_, frame, dev.proc_delay_, from_ev ? kToPeerSe : kToPeerEv);
}

void RelayDevice::on_frame(netsim::Simulator& sim, const netsim::Frame& frame) {
    relay_forward(*this, sim, frame);
}

void RelayDevice::on_link_state(netsim::Simulator& sim, netsim::LinkId link, bool up) {
    if (link != ev_port_ && link != se_port_) return;
    auto& queue = link == ev_port_ ? held_ev_ : held_se_;
    if (!up) {
        queue.clear();
        return;
    }
    while (!queue.empty()) {
        Held h = std::move(queue.front());
        queue.pop_front();
        ++forwarded_;
        sim.send(link, id(), std::move(h.payload), h.opts);
    }
}

}  // namespace evx::attacker
