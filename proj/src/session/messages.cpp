#include "evx/session/messages.hpp"

#include <cmath>
#include <stdexcept>

#include "evx/session/wire.hpp"

namespace evx::session {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void put_schedule(wire::Writer& w, const ChargeSchedule& s) {
    w.i64(s.target_energy_wh);
    w.i64(s.max_power_w);
    w.u32(s.departure_s);
}

ChargeSchedule get_schedule(wire::Reader& r) {
    ChargeSchedule s;
    s.target_energy_wh = r.i64();
    s.max_power_w = r.i64();
    s.departure_s = r.u32();
    return s;
}

void encode_body(wire::Writer& w, const MessageBody& body) {
    std::visit(
        Overloaded{
            [](const SdpRequest&) {},
            [&](const SdpResponse& m) {
                w.raw(m.address);
                w.u16(m.port);
                w.u8(static_cast<std::uint8_t>(m.security));
            },
            [&](const SessionSetupReq& m) { w.str(m.evcc_id); },
            [&](const SessionSetupRes& m) { w.u64(m.session_id); },
            [&](const AuthorizationReq& m) { w.str(m.contract_id); },
            [&](const AuthorizationRes& m) { w.u8(m.accepted ? 1 : 0); },
            [&](const ChargeParameterReq& m) { put_schedule(w, m.schedule); },
            [&](const ChargeParameterRes& m) { put_schedule(w, m.accepted_schedule); },
            [&](const PowerDeliveryReq& m) { w.u8(static_cast<std::uint8_t>(m.action)); },
            [&](const PowerDeliveryRes& m) { w.u8(m.ok ? 1 : 0); },
            [&](const MeteringReceiptReq& m) {
                w.str(m.reading.evse_id);
                w.i64(m.reading.energy);
                w.f64(m.reading.interval);
                w.f64(m.reading.timestamp);
            },
            [&](const MeteringReceiptRes& m) { w.u8(m.ok ? 1 : 0); },
            [](const SessionStopReq&) {},
            [](const SessionStopRes&) {},
            [&](const ChannelHello& m) { w.str(m.certificate_id); },
            [&](const ChannelAccept& m) { w.str(m.certificate_id); },
            [](const ChannelFinished&) {},
        },
        body);
}

bool get_bool(wire::Reader& r) {
    const auto v = r.u8();
    if (v > 1) throw DecodeError("boolean field out of range");
    return v == 1;
}

MessageBody decode_body(MessageTag tag, wire::Reader& r) {
    switch (tag) {
        case MessageTag::SdpRequest:
            return SdpRequest{};
        case MessageTag::SdpResponse: {
            SdpResponse m;
            auto a = r.raw(m.address.size());
            std::copy(a.begin(), a.end(), m.address.begin());
            m.port = r.u16();
            const auto sec = r.u8();
            if (sec != 0x00 && sec != 0x10) throw DecodeError("unknown security level");
            m.security = static_cast<SecurityLevel>(sec);
            return m;
        }
        case MessageTag::SessionSetupReq:
            return SessionSetupReq{r.str()};
        case MessageTag::SessionSetupRes:
            return SessionSetupRes{r.u64()};
        case MessageTag::AuthorizationReq:
            return AuthorizationReq{r.str()};
        case MessageTag::AuthorizationRes:
            return AuthorizationRes{get_bool(r)};
        case MessageTag::ChargeParameterReq:
            return ChargeParameterReq{get_schedule(r)};
        case MessageTag::ChargeParameterRes:
            return ChargeParameterRes{get_schedule(r)};
        case MessageTag::PowerDeliveryReq: {
            const auto a = r.u8();
            if (a > 1) throw DecodeError("unknown power action");
            return PowerDeliveryReq{static_cast<PowerAction>(a)};
        }
        case MessageTag::PowerDeliveryRes:
            return PowerDeliveryRes{get_bool(r)};
        case MessageTag::MeteringReceiptReq: {
            power::MeterReading reading;
            reading.evse_id = r.str();
            reading.energy = r.i64();
            reading.interval = r.f64();
            reading.timestamp = r.f64();
            return MeteringReceiptReq{reading};
        }
        case MessageTag::MeteringReceiptRes:
            return MeteringReceiptRes{get_bool(r)};
        case MessageTag::SessionStopReq:
            return SessionStopReq{};
        case MessageTag::SessionStopRes:
            return SessionStopRes{};
        case MessageTag::ChannelHello:
            return ChannelHello{r.str()};
        case MessageTag::ChannelAccept:
            return ChannelAccept{r.str()};
        case MessageTag::ChannelFinished:
            return ChannelFinished{};
    }
    throw DecodeError("unknown message tag");
}

bool known_tag(std::uint8_t t) {
    return (t >= 0x01 && t <= 0x0E) || (t >= 0x10 && t <= 0x12);
}

}  // namespace

ChargeSchedule ChargeSchedule::from_kwh(double target_kwh, double max_kw, std::uint32_t departure_s) {
    return ChargeSchedule{static_cast<std::int64_t>(std::llround(target_kwh * 1000.0)),
                          static_cast<std::int64_t>(std::llround(max_kw * 1000.0)), departure_s};
}

MessageTag V2GMessage::tag() const {
    // Variant alternatives are declared in tag order, with a gap before the
    // handshake block.
    const auto i = static_cast<std::uint8_t>(body.index());
    return static_cast<MessageTag>(i < 14 ? i + 1 : i + 2);
}

Bytes encode(const V2GMessage& msg) {
    Bytes payload;
    wire::Writer pw(payload);
    encode_body(pw, msg.body);

    Bytes out;
    out.reserve(13 + payload.size());
    wire::Writer w(out);
    w.u8(static_cast<std::uint8_t>(msg.tag()));
    w.u64(msg.session_id);
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.raw(payload);
    return out;
}

V2GMessage decode(std::span<const std::uint8_t> frame) {
    wire::Reader r(frame);
    const auto raw_tag = r.u8();
    if (!known_tag(raw_tag)) throw DecodeError("unknown message tag " + std::to_string(raw_tag));
    V2GMessage msg;
    msg.session_id = r.u64();
    const std::uint32_t len = r.u32();
    if (r.remaining() != len) throw DecodeError("payload length mismatch");
    wire::Reader body(r.raw(len));
    msg.body = decode_body(static_cast<MessageTag>(raw_tag), body);
    if (body.remaining() != 0) throw DecodeError("trailing bytes in payload");
    return msg;
}

bool is_request(MessageTag tag) {
    const auto t = static_cast<std::uint8_t>(tag);
    return t >= 0x01 && t <= 0x0E && (t % 2) == 1;
}

bool is_response(MessageTag tag) {
    const auto t = static_cast<std::uint8_t>(tag);
    return t >= 0x02 && t <= 0x0E && (t % 2) == 0;
}

MessageTag response_for(MessageTag request) {
    if (!is_request(request)) throw std::invalid_argument("not a request tag");
    return static_cast<MessageTag>(static_cast<std::uint8_t>(request) + 1);
}

std::string to_string(MessageTag tag) {
    switch (tag) {
        case MessageTag::SdpRequest: return "SdpRequest";
        case MessageTag::SdpResponse: return "SdpResponse";
        case MessageTag::SessionSetupReq: return "SessionSetupReq";
        case MessageTag::SessionSetupRes: return "SessionSetupRes";
        case MessageTag::AuthorizationReq: return "AuthorizationReq";
        case MessageTag::AuthorizationRes: return "AuthorizationRes";
        case MessageTag::ChargeParameterReq: return "ChargeParameterReq";
        case MessageTag::ChargeParameterRes: return "ChargeParameterRes";
        case MessageTag::PowerDeliveryReq: return "PowerDeliveryReq";
        case MessageTag::PowerDeliveryRes: return "PowerDeliveryRes";
        case MessageTag::MeteringReceiptReq: return "MeteringReceiptReq";
        case MessageTag::MeteringReceiptRes: return "MeteringReceiptRes";
        case MessageTag::SessionStopReq: return "SessionStopReq";
        case MessageTag::SessionStopRes: return "SessionStopRes";
        case MessageTag::ChannelHello: return "ChannelHello";
        case MessageTag::ChannelAccept: return "ChannelAccept";
        case MessageTag::ChannelFinished: return "ChannelFinished";
    }
    return "Unknown";
}

}  // namespace evx::session
