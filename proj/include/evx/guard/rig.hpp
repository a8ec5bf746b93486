#pragma once

#include <optional>

#include "evx/guard/protocol.hpp"
#include "evx/netsim/simulator.hpp"
#include "evx/session/channel.hpp"

namespace evx::guard {

// Two endpoints that run nothing but the guard over a simulated network, for
// measuring the protocol in isolation from the charging session. Each node
// has a single port; anything (links, routers, relays) may sit in between.

class VerifierNode : public netsim::Node {
public:
    VerifierNode(DBConfig config, netsim::Rng& rng, session::ContractCredential cred,
                 const session::TrustStore& trust);

    void attach(netsim::LinkId port) { port_ = port; }
    void start(netsim::Simulator& sim);

    void on_frame(netsim::Simulator& sim, const netsim::Frame& frame) override;
    void on_timer(netsim::Simulator& sim, std::uint64_t token) override;
    std::string name() const override { return "verifier"; }

    const Verifier& verifier() const { return verifier_; }
    bool done() const { return verifier_.done(); }
    /// Simulated time from the first challenge to the verdict.
    double duration() const { return verifier_.finished_at() - verifier_.started_at(); }

private:
    void apply(netsim::Simulator& sim, const Verifier::Step& step);

    Verifier verifier_;
    session::ChannelHandshake handshake_;
    netsim::LinkId port_ = 0;
};

class ProverNode : public netsim::Node {
public:
    ProverNode(DBConfig config, netsim::Rng& rng, session::Certificate cert,
               const session::TrustStore& trust);

    void attach(netsim::LinkId port) { port_ = port; }
    /// A silent prover never answers challenges.
    void set_silent(bool silent) { silent_ = silent; }
    /// Processing time before each response leaves the node.
    void set_turnaround(double seconds) { turnaround_ = seconds; }

    void on_frame(netsim::Simulator& sim, const netsim::Frame& frame) override;
    std::string name() const override { return "prover"; }

    const Prover& prover() const { return prover_; }

private:
    Prover prover_;
    session::ChannelHandshake handshake_;
    netsim::LinkId port_ = 0;
    bool silent_ = false;
    double turnaround_ = 0.02e-3;
};

/// Runs the fast phase to completion (all k exchanges, an early abort or a
/// timeout) and returns the combined view of both sides.
DBTranscript fast_exchange(VerifierNode& ev, ProverNode& se, netsim::Simulator& sim);

/// Runs the whole guard: fast phase, timing check, secure channel and
/// transcript verification.
DBVerdict run_distance_bounding(VerifierNode& ev, ProverNode& se, netsim::Simulator& sim);

}  // namespace evx::guard
