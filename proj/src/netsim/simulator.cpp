#include "evx/netsim/simulator.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>

namespace evx::netsim {

void EventQueue::push(double at, std::variant<Frame, TimerEvent> body) {
    heap_.push(Event{at, next_seq_++, std::move(body)});
}

double EventQueue::next_time() const {
    if (heap_.empty()) throw EmptyQueue();
    return heap_.top().at;
}

Event EventQueue::advance(SimClock& clock) {
    if (heap_.empty()) throw EmptyQueue();
    Event ev = heap_.top();
    heap_.pop();
    if (ev.at > clock.now) clock.now = ev.at;
    return ev;
}

Frame schedule_send(EventQueue& queue, LinkId link_id, const Link& link, NodeId from,
                    Bytes payload, const SimClock& clock, Rng& rng, const SendOptions& opts) {
    if (!link.up) throw LinkDown(link_id);
    Frame f;
    f.src = from;
    f.dst = link.other(from);
    f.link = link_id;
    f.payload = std::move(payload);
    f.sent_at = clock.now + opts.depart_delay;
    f.deliver_at = std::max(opts.not_before, f.sent_at + sample_delay(link.model, rng));
    f.opaque = opts.opaque;
    f.seal = opts.seal;
    f.overlay = opts.overlay;
    queue.push(f.deliver_at, f);
    return f;
}

NodeId Simulator::add_node(Node& node) {
    node.id_ = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(&node);
    return node.id_;
}

LinkId Simulator::add_link(NodeId a, NodeId b, LatencyModel model, bool up, bool ordered) {
    links_.push_back(Link{a, b, std::move(model), up, ordered});
    last_delivery_.push_back({0.0, 0.0});
    return static_cast<LinkId>(links_.size() - 1);
}

void Simulator::set_link_up(LinkId id, bool up) {
    Link& l = links_.at(id);
    if (l.up == up) return;
    l.up = up;
    nodes_.at(l.endpoint_a)->on_link_state(*this, id, up);
    nodes_.at(l.endpoint_b)->on_link_state(*this, id, up);
}

const Frame& Simulator::send(LinkId link, NodeId from, Bytes payload, const SendOptions& opts) {
    const Link& l = links_.at(link);
    if (!l.touches(from)) throw LinkDown(link);
    if (!l.ordered) {
        last_sent_ = schedule_send(queue_, link, l, from, std::move(payload), clock_, rng_, opts);
        return last_sent_;
    }
    double& last = last_delivery_[link][from == l.endpoint_a ? 0 : 1];
    SendOptions o = opts;
    o.not_before = std::max(o.not_before, last);
    last_sent_ = schedule_send(queue_, link, l, from, std::move(payload), clock_, rng_, o);
    last = last_sent_.deliver_at;
    return last_sent_;
}

void Simulator::schedule_timer(NodeId node, double delay, std::uint64_t token) {
    queue_.push(clock_.now + (delay > 0.0 ? delay : 0.0), TimerEvent{node, token});
}

bool Simulator::step() {
    if (queue_.empty()) return false;
    Event ev = queue_.advance(clock_);
    ++processed_;
    if (logging_) record(ev);
    if (auto* frame = std::get_if<Frame>(&ev.body)) {
        // Frames in flight on a link that went down are lost.
        if (!links_.at(frame->link).up) return true;
        nodes_.at(frame->dst)->on_frame(*this, *frame);
    } else {
        const auto& t = std::get<TimerEvent>(ev.body);
        nodes_.at(t.node)->on_timer(*this, t.token);
    }
    return true;
}

void Simulator::run(double horizon) {
    stopped_ = false;
    while (!stopped_ && !queue_.empty() && queue_.next_time() <= horizon) {
        step();
    }
}

void Simulator::record(const Event& ev) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &ev.at, sizeof bits);
    char head[96];
    if (const auto* f = std::get_if<Frame>(&ev.body)) {
        std::snprintf(head, sizeof head, "%016" PRIx64 " F %u>%u l%u o%d s%016" PRIx64 " ", bits,
                      f->src, f->dst, f->link, f->opaque ? 1 : 0, f->seal);
        log_ += head;
        static const char* hex = "0123456789abcdef";
        for (std::uint8_t b : f->payload) {
            log_ += hex[b >> 4];
            log_ += hex[b & 0xF];
        }
    } else {
        const auto& t = std::get<TimerEvent>(ev.body);
        std::snprintf(head, sizeof head, "%016" PRIx64 " T %u %" PRIu64, bits, t.node, t.token);
        log_ += head;
    }
    log_ += '\n';
}

}  // namespace evx::netsim
