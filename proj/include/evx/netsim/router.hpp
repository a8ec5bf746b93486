#pragma once

#include "evx/netsim/simulator.hpp"

namespace evx::netsim {

/// Two-port store-and-forward hop (a WiFi access point between two stations).
/// Frames keep their payload, seal and overlay id; frames arriving while the
/// egress link is down are dropped.
class Router : public Node {
public:
    explicit Router(std::string label = "router") : label_(std::move(label)) {}

    void attach(LinkId port_a, LinkId port_b) {
        port_a_ = port_a;
        port_b_ = port_b;
    }

    void on_frame(Simulator& sim, const Frame& frame) override {
        const LinkId out = frame.link == port_a_ ? port_b_ : port_a_;
        if (!sim.link(out).up) return;
        sim.send(out, id(), frame.payload,
                 SendOptions{0.0, frame.opaque, frame.seal, frame.overlay});
    }

    std::string name() const override { return label_; }

private:
    std::string label_;
    LinkId port_a_ = 0;
    LinkId port_b_ = 0;
};

}  // namespace evx::netsim
