#include "evx/guard/rig.hpp"

#include "evx/session/messages.hpp"

namespace evx::guard {

VerifierNode::VerifierNode(DBConfig config, netsim::Rng& rng, session::ContractCredential cred,
                           const session::TrustStore& trust)
    : verifier_(config, rng), handshake_(session::ChannelHandshake::initiator(std::move(cred), trust)) {}

void VerifierNode::start(netsim::Simulator& sim) {
    apply(sim, verifier_.begin(sim.now()));
}

void VerifierNode::apply(netsim::Simulator& sim, const Verifier::Step& step) {
    if (step.send) sim.send(port_, id(), *step.send);
    if (step.arm_timeout) {
        sim.schedule_timer(id(), verifier_.config().per_exchange_timeout, *step.arm_timeout);
    }
    if (step.timing_passed) sim.send(port_, id(), session::encode(handshake_.hello()));
}

void VerifierNode::on_frame(netsim::Simulator& sim, const netsim::Frame& frame) {
    if (is_guard_frame(frame.payload)) {
        if (frame.payload[0] == kReportTag) {
            const auto& ch = handshake_.channel();
            if (!frame.opaque || !ch.verify(frame.payload, frame.seal)) return;
            verifier_.on_report(frame.payload, sim.now());
            return;
        }
        apply(sim, verifier_.on_response(frame.payload, sim.now()));
        return;
    }
    if (auto reply = handshake_.on_message(session::decode(frame.payload))) {
        sim.send(port_, id(), session::encode(*reply));
    }
}

void VerifierNode::on_timer(netsim::Simulator& sim, std::uint64_t token) {
    verifier_.on_timeout(static_cast<std::uint32_t>(token), sim.now());
}

ProverNode::ProverNode(DBConfig config, netsim::Rng& rng, session::Certificate cert,
                       const session::TrustStore& trust)
    : prover_(config, rng), handshake_(session::ChannelHandshake::responder(std::move(cert), trust)) {}

void ProverNode::on_frame(netsim::Simulator& sim, const netsim::Frame& frame) {
    if (is_guard_frame(frame.payload)) {
        if (silent_) return;
        if (auto res = prover_.on_challenge(frame.payload)) {
            sim.send(port_, id(), *res, netsim::SendOptions{turnaround_});
        }
        return;
    }
    const auto before = handshake_.status();
    if (auto reply = handshake_.on_message(session::decode(frame.payload))) {
        sim.send(port_, id(), session::encode(*reply));
    }
    if (before != session::ChannelHandshake::Status::Up &&
        handshake_.status() == session::ChannelHandshake::Status::Up) {
        Bytes report = prover_.report();
        const auto seal = handshake_.channel().seal(report);
        sim.send(port_, id(), std::move(report), netsim::SendOptions{0.0, true, seal});
    }
}

DBTranscript fast_exchange(VerifierNode& ev, ProverNode& se, netsim::Simulator& sim) {
    if (ev.verifier().state() == Verifier::State::Idle) ev.start(sim);
    while (ev.verifier().state() == Verifier::State::Exchanging && sim.step()) {
    }
    const Verifier& v = ev.verifier();
    const Prover& p = se.prover();
    return DBTranscript{v.alpha(), p.beta(), p.alpha_received(), v.beta_received(), v.rtts()};
}

DBVerdict run_distance_bounding(VerifierNode& ev, ProverNode& se, netsim::Simulator& sim) {
    fast_exchange(ev, se, sim);
    while (!ev.done() && sim.step()) {
    }
    if (!ev.done()) throw std::logic_error("guard stalled before a verdict");
    return ev.verifier().verdict();
}

}  // namespace evx::guard
