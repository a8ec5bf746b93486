#include "evx/session/state_machine.hpp"

#include <algorithm>

#include "evx/power/billing.hpp"

namespace evx::session {

namespace {

bool after_setup(Phase p) {
    return p >= Phase::SetUp && p <= Phase::Charging;
}

void advance(SessionState& s, Phase p) {
    s.phase = p;
    if (p != Phase::Stopped && p != Phase::Unplugged && p > s.furthest) s.furthest = p;
}

void abort_session(SessionState& s, std::string reason) {
    s.phase = Phase::Stopped;
    s.pending_power.reset();
    s.abort_reason = std::move(reason);
}

V2GMessage msg(const SessionState& s, MessageBody body) {
    return V2GMessage{s.session_id, std::move(body)};
}

[[noreturn]] void reject(const SessionState& s, const SessionInput& in) {
    throw ProtocolViolation(s.phase, describe(in));
}

StepResult evcc_message(const SessionState& state, const V2GMessage& m, const SessionInput& in,
                        const EvccProfile& profile) {
    StepResult r{state, {}};
    SessionState& s = r.state;
    if (after_setup(s.phase) && m.session_id != s.session_id) reject(state, in);

    switch (s.phase) {
        case Phase::Paired:
            if (const auto* sdp = std::get_if<SdpResponse>(&m.body)) {
                s.peer_address = sdp->address;
                advance(s, Phase::Discovered);
                return r;
            }
            break;
        case Phase::Secured:
            if (const auto* res = std::get_if<SessionSetupRes>(&m.body)) {
                s.session_id = res->session_id;
                advance(s, Phase::SetUp);
                r.out.push_back(msg(s, AuthorizationReq{profile.contract_id}));
                return r;
            }
            break;
        case Phase::SetUp:
            if (const auto* res = std::get_if<AuthorizationRes>(&m.body)) {
                if (!res->accepted) {
                    abort_session(s, "authorization rejected");
                    return r;
                }
                advance(s, Phase::Authorized);
                r.out.push_back(msg(s, ChargeParameterReq{profile.requested}));
                return r;
            }
            break;
        case Phase::Authorized:
            if (const auto* res = std::get_if<ChargeParameterRes>(&m.body)) {
                s.agreed = res->accepted_schedule;
                advance(s, Phase::ParamsAgreed);
                s.pending_power = PowerAction::Start;
                r.out.push_back(msg(s, PowerDeliveryReq{PowerAction::Start}));
                return r;
            }
            break;
        case Phase::ParamsAgreed:
            if (const auto* res = std::get_if<PowerDeliveryRes>(&m.body)) {
                if (s.pending_power != PowerAction::Start) break;
                s.pending_power.reset();
                if (!res->ok) {
                    abort_session(s, "power delivery refused");
                    return r;
                }
                advance(s, Phase::Charging);
                return r;
            }
            break;
        case Phase::Charging:
            if (std::holds_alternative<MeteringReceiptReq>(m.body)) {
                r.out.push_back(msg(s, MeteringReceiptRes{true}));
                return r;
            }
            if (std::holds_alternative<PowerDeliveryRes>(m.body) &&
                s.pending_power == PowerAction::Stop) {
                s.pending_power.reset();
                advance(s, Phase::Stopped);
                r.out.push_back(msg(s, SessionStopReq{}));
                return r;
            }
            break;
        case Phase::Stopped:
            // A receipt already in flight when the stop was answered.
            if (std::holds_alternative<MeteringReceiptReq>(m.body)) {
                r.out.push_back(msg(s, MeteringReceiptRes{true}));
                return r;
            }
            if (std::holds_alternative<SessionStopRes>(m.body)) return r;
            break;
        default:
            break;
    }
    reject(state, in);
}

StepResult secc_message(const SessionState& state, const V2GMessage& m, const SessionInput& in,
                        const SeccProfile& profile) {
    StepResult r{state, {}};
    SessionState& s = r.state;
    if (after_setup(s.phase) && m.session_id != s.session_id) reject(state, in);

    switch (s.phase) {
        case Phase::Paired:
        case Phase::Discovered:
            if (std::holds_alternative<SdpRequest>(m.body)) {
                advance(s, Phase::Discovered);
                r.out.push_back(msg(s, SdpResponse{profile.address, profile.port, SecurityLevel::Tls}));
                return r;
            }
            break;
        case Phase::Secured:
            if (std::holds_alternative<SessionSetupReq>(m.body)) {
                s.session_id = profile.new_session_id ? profile.new_session_id() : 1;
                advance(s, Phase::SetUp);
                r.out.push_back(msg(s, SessionSetupRes{s.session_id}));
                return r;
            }
            break;
        case Phase::SetUp:
            if (const auto* req = std::get_if<AuthorizationReq>(&m.body)) {
                const AuthorizationRes res =
                    profile.authorizer ? profile.authorizer(s, *req) : AuthorizationRes{false};
                r.out.push_back(msg(s, res));
                if (res.accepted) {
                    s.contract_id = req->contract_id;
                    advance(s, Phase::Authorized);
                } else {
                    abort_session(s, "authorization rejected");
                }
                return r;
            }
            break;
        case Phase::Authorized:
            if (const auto* req = std::get_if<ChargeParameterReq>(&m.body)) {
                if (req->schedule.max_power_w <= 0) reject(state, in);
                s.agreed = accept_schedule(req->schedule, profile);
                advance(s, Phase::ParamsAgreed);
                r.out.push_back(msg(s, ChargeParameterRes{*s.agreed}));
                return r;
            }
            break;
        case Phase::ParamsAgreed:
        case Phase::Charging:
            if (const auto* req = std::get_if<PowerDeliveryReq>(&m.body)) {
                advance(s, req->action == PowerAction::Start ? Phase::Charging : Phase::Stopped);
                r.out.push_back(msg(s, PowerDeliveryRes{true}));
                return r;
            }
            if (s.phase == Phase::Charging && std::holds_alternative<MeteringReceiptRes>(m.body)) {
                return r;
            }
            break;
        case Phase::Stopped:
            if (const auto* req = std::get_if<PowerDeliveryReq>(&m.body)) {
                if (req->action == PowerAction::Stop) {
                    r.out.push_back(msg(s, PowerDeliveryRes{true}));
                    return r;
                }
            }
            if (std::holds_alternative<MeteringReceiptRes>(m.body)) return r;
            break;
        default:
            break;
    }
    if (std::holds_alternative<SessionStopReq>(m.body) && s.phase >= Phase::SetUp) {
        advance(s, Phase::Stopped);
        r.out.push_back(msg(s, SessionStopRes{}));
        return r;
    }
    reject(state, in);
}

}  // namespace

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Unplugged: return "Unplugged";
        case Phase::Paired: return "Paired";
        case Phase::Discovered: return "Discovered";
        case Phase::DistanceBounding: return "DistanceBounding";
        case Phase::Secured: return "Secured";
        case Phase::SetUp: return "SetUp";
        case Phase::Authorized: return "Authorized";
        case Phase::ParamsAgreed: return "ParamsAgreed";
        case Phase::Charging: return "Charging";
        case Phase::Stopped: return "Stopped";
    }
    return "?";
}

std::string describe(const SessionInput& in) {
    struct Namer {
        std::string operator()(const PlugIn&) const { return "PlugIn"; }
        std::string operator()(const Unplug&) const { return "Unplug"; }
        std::string operator()(const BeginDistanceBounding&) const { return "BeginDistanceBounding"; }
        std::string operator()(const ChannelUp&) const { return "ChannelUp"; }
        std::string operator()(const GuardVerdict& v) const { return "GuardVerdict(" + v.outcome + ")"; }
        std::string operator()(const StopRequested&) const { return "StopRequested"; }
        std::string operator()(const TamperDetected&) const { return "TamperDetected"; }
        std::string operator()(const ChannelFailed&) const { return "ChannelFailed"; }
        std::string operator()(const V2GMessage& m) const { return to_string(m.tag()); }
    };
    return std::visit(Namer{}, in);
}

StepResult evcc_step(const SessionState& state, const SessionInput& input, const EvccProfile& profile) {
    StepResult r{state, {}};
    SessionState& s = r.state;

    if (std::holds_alternative<Unplug>(input)) {
        s = SessionState{};
        return r;
    }
    if (std::holds_alternative<TamperDetected>(input)) {
        if (s.phase == Phase::Unplugged) reject(state, input);
        abort_session(s, "tampered payload");
        return r;
    }
    if (const auto* f = std::get_if<ChannelFailed>(&input)) {
        if (s.phase == Phase::Unplugged || s.phase >= Phase::Secured) reject(state, input);
        abort_session(s, "secure channel: " + f->reason);
        return r;
    }
    if (const auto* m = std::get_if<V2GMessage>(&input)) return evcc_message(state, *m, input, profile);

    switch (s.phase) {
        case Phase::Unplugged:
            if (std::holds_alternative<PlugIn>(input)) {
                advance(s, Phase::Paired);
                r.out.push_back(msg(s, SdpRequest{}));
                return r;
            }
            break;
        case Phase::Discovered:
            if (std::holds_alternative<BeginDistanceBounding>(input)) {
                advance(s, Phase::DistanceBounding);
                return r;
            }
            if (std::holds_alternative<ChannelUp>(input)) {
                advance(s, Phase::Secured);
                r.out.push_back(msg(s, SessionSetupReq{profile.evcc_id}));
                return r;
            }
            [[fallthrough]];
        case Phase::DistanceBounding:
            // A verdict may also arrive in Discovered when the guard ran as one
            // atomic unit (begin + exchange + verification).
            if (const auto* v = std::get_if<GuardVerdict>(&input)) {
                if (!v->accepted) {
                    abort_session(s, "guard: " + v->outcome);
                    return r;
                }
                advance(s, Phase::Secured);
                r.out.push_back(msg(s, SessionSetupReq{profile.evcc_id}));
                return r;
            }
            break;
        case Phase::Charging:
            if (std::holds_alternative<StopRequested>(input)) {
                if (s.pending_power != PowerAction::Stop) {
                    s.pending_power = PowerAction::Stop;
                    r.out.push_back(msg(s, PowerDeliveryReq{PowerAction::Stop}));
                }
                return r;
            }
            break;
        default:
            break;
    }
    reject(state, input);
}

StepResult secc_step(const SessionState& state, const SessionInput& input, const SeccProfile& profile) {
    StepResult r{state, {}};
    SessionState& s = r.state;

    if (std::holds_alternative<Unplug>(input)) {
        s = SessionState{};
        return r;
    }
    if (std::holds_alternative<TamperDetected>(input)) {
        if (s.phase == Phase::Unplugged) reject(state, input);
        abort_session(s, "tampered payload");
        return r;
    }
    if (const auto* f = std::get_if<ChannelFailed>(&input)) {
        if (s.phase == Phase::Unplugged || s.phase >= Phase::Secured) reject(state, input);
        abort_session(s, "secure channel: " + f->reason);
        return r;
    }
    if (const auto* m = std::get_if<V2GMessage>(&input)) return secc_message(state, *m, input, profile);

    switch (s.phase) {
        case Phase::Unplugged:
            if (std::holds_alternative<PlugIn>(input)) {
                advance(s, Phase::Paired);
                return r;
            }
            break;
        case Phase::Discovered:
            if (std::holds_alternative<BeginDistanceBounding>(input)) {
                advance(s, Phase::DistanceBounding);
                return r;
            }
            [[fallthrough]];
        case Phase::DistanceBounding:
            if (std::holds_alternative<ChannelUp>(input)) {
                advance(s, Phase::Secured);
                return r;
            }
            break;
        default:
            break;
    }
    reject(state, input);
}

ChargeSchedule accept_schedule(const ChargeSchedule& requested, const SeccProfile& profile) {
    ChargeSchedule s = requested;
    s.max_power_w = std::min(s.max_power_w, profile.max_power_w);
    if (s.target_energy_wh < 0 && !profile.bidirectional) s.target_energy_wh = 0;
    return s;
}

AuthorizationRes authorize(power::ControlCenter& cc, const SessionState& secc,
                           const std::string& evse_id, const AuthorizationReq& req) {
    if (secc.phase < Phase::Secured || secc.phase == Phase::Stopped) throw NotSecured();
    if (!cc.contract_valid(req.contract_id)) return AuthorizationRes{false};
    cc.bind(evse_id, power::SessionBinding{secc.session_id, req.contract_id});
    return AuthorizationRes{true};
}

}  // namespace evx::session
