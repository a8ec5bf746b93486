#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "evx/netsim/latency.hpp"
#include "evx/netsim/rng.hpp"

namespace evx::netsim {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using Bytes = std::vector<std::uint8_t>;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

class LinkDown : public std::runtime_error {
public:
    explicit LinkDown(LinkId id)
        : std::runtime_error("link " + std::to_string(id) + " is down"), link(id) {}
    LinkId link;
};

class EmptyQueue : public std::runtime_error {
public:
    EmptyQueue() : std::runtime_error("event queue is empty") {}
};

/// Simulated time in seconds. Only the event loop moves it, and only forward.
struct SimClock {
    double now = 0.0;
};

struct Link {
    NodeId endpoint_a = kNoNode;
    NodeId endpoint_b = kNoNode;
    LatencyModel model;
    bool up = true;
    /// Stream transport: frames in one direction are never delivered out of
    /// send order (a later frame waits for the one ahead of it).
    bool ordered = false;

    NodeId other(NodeId n) const { return n == endpoint_a ? endpoint_b : endpoint_a; }
    bool touches(NodeId n) const { return n == endpoint_a || n == endpoint_b; }
};

struct Frame {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    LinkId link = 0;
    Bytes payload;
    double sent_at = 0.0;
    double deliver_at = 0.0;
    /// Set for secure-channel traffic: forwarders may move it but not read it.
    bool opaque = false;
    /// Integrity tag computed by the secure-channel sender over payload.
    std::uint64_t seal = 0;
    /// Overlay (tunnel) identifier carried alongside the payload.
    std::uint32_t overlay = 0;
};

struct TimerEvent {
    NodeId node = kNoNode;
    std::uint64_t token = 0;
};

struct Event {
    double at = 0.0;
    std::uint64_t seq = 0;
    std::variant<Frame, TimerEvent> body;
};

/// Min-queue on (time, insertion order).
class EventQueue {
public:
    void push(double at, std::variant<Frame, TimerEvent> body);
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    double next_time() const;

    /// Pops the earliest event and moves the clock to its time.
    /// Throws EmptyQueue when nothing is pending.
    Event advance(SimClock& clock);

private:
    struct Later {
        bool operator()(const Event& x, const Event& y) const {
            if (x.at != y.at) return x.at > y.at;
            return x.seq > y.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

struct SendOptions {
    /// Local processing time before the frame leaves the sender.
    double depart_delay = 0.0;
    bool opaque = false;
    std::uint64_t seal = 0;
    std::uint32_t overlay = 0;
    /// Earliest permitted delivery time (absolute).
    double not_before = 0.0;
};

/// Samples the link delay and enqueues the frame.
/// deliver_at = max(not_before, clock.now + depart_delay + sample_delay(link.model)).
Frame schedule_send(EventQueue& queue, LinkId link_id, const Link& link, NodeId from,
                    Bytes payload, const SimClock& clock, Rng& rng,
                    const SendOptions& opts = {});

class Simulator;

class Node {
public:
    virtual ~Node() = default;
    virtual void on_frame(Simulator& sim, const Frame& frame) = 0;
    virtual void on_timer(Simulator& /*sim*/, std::uint64_t /*token*/) {}
    virtual void on_link_state(Simulator& /*sim*/, LinkId /*link*/, bool /*up*/) {}

    NodeId id() const { return id_; }
    virtual std::string name() const { return "node" + std::to_string(id_); }

private:
    friend class Simulator;
    NodeId id_ = kNoNode;
};

/// Single-threaded discrete-event loop. Nodes are owned by the caller and must
/// outlive the simulator.
class Simulator {
public:
    explicit Simulator(std::uint64_t seed) : rng_(seed) {}

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    NodeId add_node(Node& node);
    LinkId add_link(NodeId a, NodeId b, LatencyModel model, bool up = true, bool ordered = false);

    const Link& link(LinkId id) const { return links_.at(id); }
    std::size_t link_count() const { return links_.size(); }
    void set_link_up(LinkId id, bool up);

    /// Throws LinkDown if the link is down or does not touch `from`.
    const Frame& send(LinkId link, NodeId from, Bytes payload, const SendOptions& opts = {});
    void schedule_timer(NodeId node, double delay, std::uint64_t token);

    /// Processes one event. Returns false when the queue is empty.
    bool step();
    /// Runs until the queue drains, the horizon passes or stop() is called.
    void run(double horizon = std::numeric_limits<double>::infinity());
    void stop() { stopped_ = true; }

    double now() const { return clock_.now; }
    const SimClock& clock() const { return clock_; }
    Rng& rng() { return rng_; }
    std::uint64_t events_processed() const { return processed_; }
    std::size_t pending() const { return queue_.size(); }

    void enable_log(bool on) { logging_ = on; }
    const std::string& log() const { return log_; }

private:
    void record(const Event& ev);

    SimClock clock_;
    Rng rng_;
    EventQueue queue_;
    std::vector<Node*> nodes_;
    std::vector<Link> links_;
    /// Latest scheduled delivery per link, index 0 for a->b and 1 for b->a.
    std::vector<std::array<double, 2>> last_delivery_;
    Frame last_sent_;
    std::uint64_t processed_ = 0;
    bool stopped_ = false;
    bool logging_ = false;
    std::string log_;
};

}  // namespace evx::netsim
