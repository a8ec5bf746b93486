#include "evx/harness/world.hpp"

#include <cstdio>
#include <cstdlib>

namespace evx::harness {

using session::ChannelHandshake;
using session::Phase;

namespace {

std::string cert_for(const std::string& owner) { return "cert:" + owner; }

bool channel_up(const std::optional<ChannelHandshake>& hs) {
    return hs && hs->status() == ChannelHandshake::Status::Up;
}

bool is_handshake(session::MessageTag t) {
    return t == session::MessageTag::ChannelHello || t == session::MessageTag::ChannelAccept ||
           t == session::MessageTag::ChannelFinished;
}

session::Address address_for(const std::string& evse_id) {
    // fe80::/64 link-local prefix plus the id bytes.
    session::Address a{};
    a[0] = 0xfe;
    a[1] = 0x80;
    for (std::size_t i = 0; i < evse_id.size() && i < 8; ++i) a[8 + i] = static_cast<std::uint8_t>(evse_id[i]);
    return a;
}

}  // namespace

bool PeerLink::operator==(const PeerLink& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case PeerKind::Wireless:
            return wireless.propagation == o.wireless.propagation &&
                   wireless.distance_m == o.wireless.distance_m && wireless.standard == o.wireless.standard;
        case PeerKind::Custom:
            return custom.kind == o.custom.kind && custom.base_delay == o.custom.base_delay &&
                   custom.jitter_std == o.custom.jitter_std;
        default:
            return true;
    }
}

std::string to_string(Topology t) {
    switch (t) {
        case Topology::LegitDirect: return "legit_direct";
        case Topology::DevicesBridging: return "devices_bridging";
        case Topology::CrossRelay: return "cross_relay";
    }
    return "?";
}

std::string to_string(PeerKind k) {
    switch (k) {
        case PeerKind::Wired: return "wired";
        case PeerKind::WifiRouter5cm: return "wifi_router_5cm";
        case PeerKind::WifiRouter2m: return "wifi_router_2m";
        case PeerKind::WifiAdhoc: return "wifi_adhoc";
        case PeerKind::Wireless: return "wireless";
        case PeerKind::Custom: return "custom";
    }
    return "?";
}

netsim::LatencyModel peer_hop_model(const PeerLink& peer) {
    namespace cal = netsim::calibration;
    switch (peer.kind) {
        case PeerKind::Wired:
            return netsim::LatencyModel::jittered(cal::kWiredTunnelBase, cal::kWiredTunnelJitter);
        case PeerKind::WifiRouter5cm:
            return netsim::LatencyModel::jittered(cal::kWifiHopBase, cal::kWifiHopJitter);
        case PeerKind::WifiRouter2m:
            return netsim::LatencyModel::jittered(cal::kWifiHopBase + cal::kRouterFarIncrement,
                                                  cal::kWifiHopJitter);
        case PeerKind::WifiAdhoc:
            return netsim::LatencyModel::jittered(cal::kAdhocBase, cal::kAdhocJitter);
        case PeerKind::Wireless:
            return netsim::LatencyModel::wireless(peer.wireless);
        case PeerKind::Custom:
            return peer.custom;
    }
    return peer.custom;
}

// ---------------------------------------------------------------- EvNode

EvNode::EvNode(std::string label, const EvParams& params, bool run_guard, guard::DBConfig guard,
               const session::TrustStore& trust)
    : label_(std::move(label)),
      profile_{label_, params.contract_id,
               session::ChargeSchedule::from_kwh(params.target_kwh, params.max_kw, 0)},
      battery_(power::Battery::from_kwh(params.capacity_kwh, params.soc)),
      run_guard_(run_guard),
      guard_config_(guard),
      trust_(&trust),
      cred_{params.contract_id, cert_for(params.contract_id), true} {}

void EvNode::plug(netsim::Simulator& sim) {
    plugged_ = true;
    ++epoch_;
    handshake_.reset();
    verifier_.reset();
    verdict_.reset();
    guard_duration_ = 0.0;
    feed(sim, session::PlugIn{});
}

void EvNode::request_stop(netsim::Simulator& sim) {
    if (state_.phase == Phase::Charging) feed(sim, session::StopRequested{});
}

void EvNode::feed(netsim::Simulator& sim, const session::SessionInput& in) {
    const Phase before = state_.phase;
    session::StepResult r;
    try {
        r = session::evcc_step(state_, in, profile_);
    } catch (const session::ProtocolViolation& e) {
        violations_.push_back(label_ + ": " + e.what());
        return;
    }
    state_ = std::move(r.state);
    for (const auto& m : r.out) send_msg(sim, m);
    if (state_.phase == before) return;

    if (on_phase) on_phase(sim, *this, state_.phase);
    if (state_.phase == Phase::Discovered) {
        if (run_guard_) {
            feed(sim, session::BeginDistanceBounding{});
            verifier_ = std::make_unique<guard::Verifier>(guard_config_, sim.rng());
            guard_step(sim, verifier_->begin(sim.now()));
        } else {
            handshake_.emplace(ChannelHandshake::initiator(cred_, *trust_));
            send_msg(sim, handshake_->hello());
        }
    }
}

void EvNode::send_msg(netsim::Simulator& sim, const session::V2GMessage& msg) {
    if (!plugged_ || !sim.link(port_).up) return;
    session::Bytes bytes = session::encode(msg);
    netsim::SendOptions opts;
    if (channel_up(handshake_)) {
        opts.opaque = true;
        opts.seal = handshake_->channel().seal(bytes);
    }
    sim.send(port_, id(), std::move(bytes), opts);
}

void EvNode::guard_step(netsim::Simulator& sim, const guard::Verifier::Step& step) {
    if (step.send && sim.link(port_).up) sim.send(port_, id(), *step.send);
    if (step.arm_timeout) {
        sim.schedule_timer(id(), guard_config_.per_exchange_timeout, (epoch_ << 32) | *step.arm_timeout);
    }
    if (step.timing_passed) {
        handshake_.emplace(ChannelHandshake::initiator(cred_, *trust_));
        send_msg(sim, handshake_->hello());
    }
    if (verifier_ && verifier_->done()) conclude_guard(sim);
}

void EvNode::conclude_guard(netsim::Simulator& sim) {
    verdict_ = verifier_->verdict();
    guard_duration_ = verifier_->finished_at() - verifier_->started_at();
    const bool ok = verdict_->outcome == guard::Outcome::Accept;
    feed(sim, session::GuardVerdict{ok, guard::to_string(verdict_->outcome)});
}

void EvNode::on_frame(netsim::Simulator& sim, const netsim::Frame& frame) {
    if (!plugged_) return;
    if (guard::is_guard_frame(frame.payload)) {
        if (!verifier_ || verifier_->done()) return;
        if (frame.payload[0] == guard::kReportTag) {
            if (!frame.opaque || !channel_up(handshake_) ||
                !handshake_->channel().verify(frame.payload, frame.seal)) {
                feed(sim, session::TamperDetected{});
                return;
            }
            verifier_->on_report(frame.payload, sim.now());
            if (verifier_->done()) conclude_guard(sim);
            return;
        }
        guard_step(sim, verifier_->on_response(frame.payload, sim.now()));
        return;
    }

    session::V2GMessage msg;
    try {
        msg = session::decode(frame.payload);
    } catch (const session::DecodeError& e) {
        violations_.push_back(label_ + ": " + e.what());
        return;
    }
    if (is_handshake(msg.tag())) {
        if (!handshake_) return;
        const bool was_up = channel_up(handshake_);
        if (auto reply = handshake_->on_message(msg)) {
            sim.send(port_, id(), session::encode(*reply));
        }
        if (!was_up && channel_up(handshake_) && !run_guard_) feed(sim, session::ChannelUp{});
        if (handshake_->status() == ChannelHandshake::Status::Failed) {
            feed(sim, session::ChannelFailed{handshake_->failure()});
        }
        return;
    }
    if (channel_up(handshake_)) {
        if (!frame.opaque || !handshake_->channel().verify(frame.payload, frame.seal)) {
            feed(sim, session::TamperDetected{});
            return;
        }
    }
    feed(sim, msg);
}

void EvNode::on_timer(netsim::Simulator& sim, std::uint64_t token) {
    if ((token >> 32) != epoch_ || !verifier_ || verifier_->done()) return;
    verifier_->on_timeout(static_cast<std::uint32_t>(token & 0xffffffffu), sim.now());
    if (verifier_->done()) conclude_guard(sim);
}

void EvNode::on_link_state(netsim::Simulator& sim, netsim::LinkId link, bool up) {
    if (link != port_ || up || !plugged_) return;
    plugged_ = false;
    ++epoch_;
    feed(sim, session::Unplug{});
    handshake_.reset();
    verifier_.reset();
}

// ---------------------------------------------------------------- SeNode

SeNode::SeNode(std::string evse_id, const WorldConfig& cfg, const session::TrustStore& trust,
               power::ControlCenter& cc, std::uint64_t session_base)
    : cfg_(&cfg), trust_(&trust), cc_(&cc), next_session_(session_base) {
    evse_.id = std::move(evse_id);
    profile_.evse_id = evse_.id;
    profile_.address = address_for(evse_.id);
    profile_.max_power_w = static_cast<std::int64_t>(std::llround(cfg.station_max_kw * 1000.0));
    profile_.bidirectional = cfg.bidirectional;
    profile_.authorizer = [this](const session::SessionState& s, const session::AuthorizationReq& req) {
        return session::authorize(*cc_, s, evse_.id, req);
    };
    profile_.new_session_id = [this] { return next_session_++; };
}

void SeNode::reset_session() {
    handshake_.reset();
    prover_.reset();
}

void SeNode::feed(netsim::Simulator& sim, const session::SessionInput& in) {
    const Phase before = state_.phase;
    session::StepResult r;
    try {
        r = session::secc_step(state_, in, profile_);
    } catch (const session::ProtocolViolation& e) {
        violations_.push_back(evse_.id + ": " + e.what());
        return;
    } catch (const session::NotSecured& e) {
        violations_.push_back(evse_.id + ": " + e.what());
        return;
    }
    state_ = std::move(r.state);
    if (before == Phase::Charging && state_.phase != Phase::Charging) deenergize(sim);
    if (state_.phase == Phase::Stopped && before != Phase::Stopped) cc_->release(evse_.id);
    for (const auto& m : r.out) send_msg(sim, m);
    if (state_.phase == Phase::Charging && before != Phase::Charging) energize(sim);
    if (state_.phase != before && on_phase) on_phase(sim, *this, state_.phase);
}

void SeNode::send_msg(netsim::Simulator& sim, const session::V2GMessage& msg) {
    if (!sim.link(port_).up) return;
    session::Bytes bytes = session::encode(msg);
    netsim::SendOptions opts;
    if (channel_up(handshake_)) {
        opts.opaque = true;
        opts.seal = handshake_->channel().seal(bytes);
    }
    sim.send(port_, id(), std::move(bytes), opts);
}

void SeNode::energize(netsim::Simulator& sim) {
    const auto& s = *state_.agreed;
    power::Delivery d;
    d.power_w = s.discharge() ? -s.max_power_w : s.max_power_w;
    d.energy_limit = std::llabs(s.target_energy_wh) * 3600;
    evse_.delivery = d;
    last_tick_ = sim.now();
    sim.schedule_timer(id(), cfg_->metering_interval, ++meter_epoch_);
}

void SeNode::deenergize(netsim::Simulator& sim) {
    if (!evse_.energized()) return;
    if (sim.now() > last_tick_) meter(sim, false);
    evse_.delivery.reset();
    ++meter_epoch_;
}

void SeNode::meter(netsim::Simulator& sim, bool send_receipt) {
    const double dt = sim.now() - last_tick_;
    power::Battery none;
    power::MeterReading reading = power::tick_power(evse_, attached_ ? *attached_ : none, dt, sim.now());
    last_tick_ = sim.now();
    cc_->record(reading);
    if (send_receipt) send_msg(sim, session::V2GMessage{state_.session_id, session::MeteringReceiptReq{reading}});
}

void SeNode::on_timer(netsim::Simulator& sim, std::uint64_t token) {
    if (token != meter_epoch_ || !evse_.energized()) return;
    meter(sim, true);
    sim.schedule_timer(id(), cfg_->metering_interval, meter_epoch_);
}

void SeNode::on_link_state(netsim::Simulator& sim, netsim::LinkId link, bool up) {
    if (link != port_) return;
    if (up) {
        if (state_.phase == Phase::Unplugged) feed(sim, session::PlugIn{});
        return;
    }
    deenergize(sim);
    cc_->release(evse_.id);
    feed(sim, session::Unplug{});
    reset_session();
}

void SeNode::on_frame(netsim::Simulator& sim, const netsim::Frame& frame) {
    if (guard::is_guard_frame(frame.payload)) {
        if (frame.payload[0] != guard::kChallengeTag) return;
        if (state_.phase == Phase::Discovered) {
            feed(sim, session::BeginDistanceBounding{});
            prover_ = std::make_unique<guard::Prover>(cfg_->guard, sim.rng());
        }
        if (state_.phase != Phase::DistanceBounding || !prover_) return;
        if (auto res = prover_->on_challenge(frame.payload)) {
            sim.send(port_, id(), std::move(*res), netsim::SendOptions{cfg_->se_turnaround});
        }
        return;
    }

    session::V2GMessage msg;
    try {
        msg = session::decode(frame.payload);
    } catch (const session::DecodeError& e) {
        violations_.push_back(evse_.id + ": " + e.what());
        return;
    }
    if (is_handshake(msg.tag())) {
        if (state_.phase != Phase::Discovered && state_.phase != Phase::DistanceBounding) return;
        if (!handshake_) {
            handshake_.emplace(ChannelHandshake::responder(
                session::Certificate{cert_for(evse_.id), true}, *trust_));
        }
        const bool was_up = channel_up(handshake_);
        if (auto reply = handshake_->on_message(msg)) {
            sim.send(port_, id(), session::encode(*reply));
        }
        if (handshake_->status() == ChannelHandshake::Status::Failed) {
            feed(sim, session::ChannelFailed{handshake_->failure()});
            return;
        }
        if (!was_up && channel_up(handshake_)) {
            feed(sim, session::ChannelUp{});
            if (prover_) {
                guard::Bytes report = prover_->report();
                const auto seal = handshake_->channel().seal(report);
                sim.send(port_, id(), std::move(report), netsim::SendOptions{0.0, true, seal});
            }
        }
        return;
    }
    if (channel_up(handshake_)) {
        if (!frame.opaque || !handshake_->channel().verify(frame.payload, frame.seal)) {
            feed(sim, session::TamperDetected{});
            return;
        }
    }
    feed(sim, msg);
}

// ---------------------------------------------------------------- World

World::World(const WorldConfig& cfg, std::uint64_t seed) : cfg_(cfg), sim_(seed) {
    cfg_.guard.validate();
    build();
}

void World::build() {
    sim_.add_node(*this);

    for (const auto* c : {&cfg_.victim.contract_id, &cfg_.attacker.contract_id}) {
        trust_.add(cert_for(*c), true);
        cc_.register_contract(*c, true);
    }
    trust_.add(cert_for("EVSE-A"), true);
    trust_.add(cert_for("EVSE-B"), true);

    ev_a_ = std::make_unique<EvNode>("EV-A", cfg_.victim, cfg_.guard_enabled, cfg_.guard, trust_);
    ev_b_ = std::make_unique<EvNode>("EV-B", cfg_.attacker, false, cfg_.guard, trust_);
    se_a_ = std::make_unique<SeNode>("EVSE-A", cfg_, trust_, cc_, 0xA0000001ULL);
    se_b_ = std::make_unique<SeNode>("EVSE-B", cfg_, trust_, cc_, 0xB0000001ULL);
    const auto ea = sim_.add_node(*ev_a_);
    const auto eb = sim_.add_node(*ev_b_);
    const auto sa = sim_.add_node(*se_a_);
    const auto sb = sim_.add_node(*se_b_);

    if (cfg_.topology == Topology::LegitDirect) {
        const auto la = sim_.add_link(ea, sa, cfg_.plc, false, true);
        const auto lb = sim_.add_link(eb, sb, cfg_.plc, false, true);
        ev_a_->attach(la);
        se_a_->attach(la);
        ev_b_->attach(lb);
        se_b_->attach(lb);
        cables_[ev_a_.get()] = Cable{{la}};
        cables_[ev_b_.get()] = Cable{{lb}};
    } else {
        const auto mode =
            cfg_.topology == Topology::CrossRelay ? attacker::RelayMode::CrossRelay : cfg_.device_mode;
        dev_a_ = std::make_unique<attacker::RelayDevice>("DEV-A", mode, cfg_.proc_delay);
        dev_b_ = std::make_unique<attacker::RelayDevice>("DEV-B", mode, cfg_.proc_delay);
        const auto da = sim_.add_node(*dev_a_);
        const auto db = sim_.add_node(*dev_b_);

        const auto ev_la = sim_.add_link(ea, da, cfg_.plc, false, true);
        const auto se_la = sim_.add_link(da, sa, cfg_.plc, false, true);
        const auto ev_lb = sim_.add_link(eb, db, cfg_.plc, false, true);
        const auto se_lb = sim_.add_link(db, sb, cfg_.plc, false, true);

        const auto hop = peer_hop_model(cfg_.peer);
        netsim::LinkId peer_a = 0;
        netsim::LinkId peer_b = 0;
        if (cfg_.peer.kind == PeerKind::WifiRouter5cm || cfg_.peer.kind == PeerKind::WifiRouter2m) {
            router_ = std::make_unique<netsim::Router>("AP");
            const auto r = sim_.add_node(*router_);
            peer_a = sim_.add_link(da, r, hop, true, true);
            peer_b = sim_.add_link(r, db, hop, true, true);
            router_->attach(peer_a, peer_b);
        } else {
            peer_a = peer_b = sim_.add_link(da, db, hop, true, true);
        }
        dev_a_->attach(ev_la, se_la, peer_a);
        dev_b_->attach(ev_lb, se_lb, peer_b);
        if (cfg_.topology == Topology::CrossRelay) {
            dev_a_->set_evasion(cfg_.evasion);
            dev_b_->set_evasion(cfg_.evasion);
        }
        ev_a_->attach(ev_la);
        se_a_->attach(se_la);
        ev_b_->attach(ev_lb);
        se_b_->attach(se_lb);
        cables_[ev_a_.get()] = Cable{{ev_la, se_la}};
        cables_[ev_b_.get()] = Cable{{ev_lb, se_lb}};
    }

    ev_a_->on_phase = [this](netsim::Simulator&, EvNode& ev, Phase p) {
        note(ev.name() + " " + session::to_string(p));
        victim_phase(p);
        if (victim_phase_hook) victim_phase_hook(p);
    };
    ev_b_->on_phase = [this](netsim::Simulator&, EvNode& ev, Phase p) {
        note(ev.name() + " " + session::to_string(p));
        if (attacker_phase_hook) attacker_phase_hook(p);
    };
    for (SeNode* se : {se_a_.get(), se_b_.get()}) {
        se->on_phase = [this](netsim::Simulator&, SeNode& s, Phase p) {
            note(s.name() + " " + session::to_string(p));
        };
    }
}

void World::plug(EvNode& ev) {
    if (ev.plugged()) return;
    for (auto l : cables_.at(&ev).links) sim_.set_link_up(l, true);
    (&ev == ev_a_.get() ? *se_a_ : *se_b_).set_attached(&ev.battery());
    note(ev.name() + " plugged in");
    ev.plug(sim_);
}

void World::unplug(EvNode& ev) {
    if (!ev.plugged()) return;
    const auto& links = cables_.at(&ev).links;
    for (auto it = links.rbegin(); it != links.rend(); ++it) sim_.set_link_up(*it, false);
    (&ev == ev_a_.get() ? *se_a_ : *se_b_).set_attached(nullptr);
    note(ev.name() + " unplugged");
    if (&ev == ev_a_.get()) {
        if (victim_left_hook) victim_left_hook();
        if (ev_b_->plugged()) after(cfg_.unplug_delay, [this] { unplug(*ev_b_); });
    }
    maybe_finish();
}

void World::after(double delay, std::function<void()> fn) {
    const auto token = next_token_++;
    pending_.emplace(token, std::move(fn));
    sim_.schedule_timer(id(), delay, token);
}

void World::on_timer(netsim::Simulator&, std::uint64_t token) {
    auto it = pending_.find(token);
    if (it == pending_.end()) return;
    auto fn = std::move(it->second);
    pending_.erase(it);
    fn();
}

void World::victim_phase(Phase p) {
    if (p == Phase::Charging && !victim_returned_) {
        after(cfg_.dwell, [this] {
            victim_returned_ = true;
            note("victim returns");
            ev_a_->request_stop(sim_);
            if (!victim_leaving_) {
                victim_leaving_ = true;
                after(cfg_.unplug_delay, [this] { unplug(*ev_a_); });
            }
        });
    }
    if (p == Phase::Stopped && !victim_leaving_ && !victim_returned_) {
        // The session ended on its own (alert, refusal); the owner gives up.
        victim_leaving_ = true;
        after(cfg_.unplug_delay, [this] { unplug(*ev_a_); });
    }
}

void World::maybe_finish() {
    if (!ev_a_->plugged() && !ev_b_->plugged()) sim_.stop();
}

void World::run() {
    note("run start");
    plug(*ev_a_);
    sim_.run(cfg_.horizon);
}

void World::note(std::string text) {
    trace_.push_back(TraceEntry{sim_.now(), std::move(text)});
}

std::vector<std::string> World::violations() const {
    std::vector<std::string> out;
    for (const auto* v : {&ev_a_->violations(), &ev_b_->violations(), &se_a_->violations(),
                          &se_b_->violations()}) {
        out.insert(out.end(), v->begin(), v->end());
    }
    return out;
}

}  // namespace evx::harness
