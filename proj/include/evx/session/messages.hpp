#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "evx/power/energy.hpp"

namespace evx::session {

using Bytes = std::vector<std::uint8_t>;

/// First byte of every canonical front-end frame.
enum class MessageTag : std::uint8_t {
    SdpRequest = 0x01,
    SdpResponse = 0x02,
    SessionSetupReq = 0x03,
    SessionSetupRes = 0x04,
    AuthorizationReq = 0x05,
    AuthorizationRes = 0x06,
    ChargeParameterReq = 0x07,
    ChargeParameterRes = 0x08,
    PowerDeliveryReq = 0x09,
    PowerDeliveryRes = 0x0A,
    MeteringReceiptReq = 0x0B,
    MeteringReceiptRes = 0x0C,
    SessionStopReq = 0x0D,
    SessionStopRes = 0x0E,
    // Secure-channel handshake (TLS stand-in).
    ChannelHello = 0x10,
    ChannelAccept = 0x11,
    ChannelFinished = 0x12,
};

/// Tags at or above this value belong to the distance-bounding guard and use
/// their own compact layouts.
inline constexpr std::uint8_t kGuardTagBase = 0x40;

/// Energy request of one session. Integer units keep the wire form exact.
struct ChargeSchedule {
    std::int64_t target_energy_wh = 0;  // negative: discharge to the grid
    std::int64_t max_power_w = 0;       // > 0
    std::uint32_t departure_s = 0;

    static ChargeSchedule from_kwh(double target_kwh, double max_kw, std::uint32_t departure_s);
    double target_kwh() const { return static_cast<double>(target_energy_wh) / 1000.0; }
    double max_kw() const { return static_cast<double>(max_power_w) / 1000.0; }
    bool discharge() const { return target_energy_wh < 0; }
    bool operator==(const ChargeSchedule&) const = default;
};

enum class SecurityLevel : std::uint8_t { Tls = 0x00, None = 0x10 };
enum class PowerAction : std::uint8_t { Start = 0, Stop = 1 };

using Address = std::array<std::uint8_t, 16>;

struct SdpRequest {
    bool operator==(const SdpRequest&) const = default;
};
struct SdpResponse {
    Address address{};
    std::uint16_t port = 0;
    SecurityLevel security = SecurityLevel::Tls;
    bool operator==(const SdpResponse&) const = default;
};
struct SessionSetupReq {
    std::string evcc_id;
    bool operator==(const SessionSetupReq&) const = default;
};
struct SessionSetupRes {
    std::uint64_t session_id = 0;
    bool operator==(const SessionSetupRes&) const = default;
};
struct AuthorizationReq {
    std::string contract_id;
    bool operator==(const AuthorizationReq&) const = default;
};
struct AuthorizationRes {
    bool accepted = false;
    bool operator==(const AuthorizationRes&) const = default;
};
struct ChargeParameterReq {
    ChargeSchedule schedule;
    bool operator==(const ChargeParameterReq&) const = default;
};
struct ChargeParameterRes {
    ChargeSchedule accepted_schedule;
    bool operator==(const ChargeParameterRes&) const = default;
};
struct PowerDeliveryReq {
    PowerAction action = PowerAction::Start;
    bool operator==(const PowerDeliveryReq&) const = default;
};
struct PowerDeliveryRes {
    bool ok = true;
    bool operator==(const PowerDeliveryRes&) const = default;
};
struct MeteringReceiptReq {
    power::MeterReading reading;
    bool operator==(const MeteringReceiptReq&) const = default;
};
struct MeteringReceiptRes {
    bool ok = true;
    bool operator==(const MeteringReceiptRes&) const = default;
};
struct SessionStopReq {
    bool operator==(const SessionStopReq&) const = default;
};
struct SessionStopRes {
    bool operator==(const SessionStopRes&) const = default;
};
struct ChannelHello {
    std::string certificate_id;
    bool operator==(const ChannelHello&) const = default;
};
struct ChannelAccept {
    std::string certificate_id;
    bool operator==(const ChannelAccept&) const = default;
};
struct ChannelFinished {
    bool operator==(const ChannelFinished&) const = default;
};

using MessageBody =
    std::variant<SdpRequest, SdpResponse, SessionSetupReq, SessionSetupRes, AuthorizationReq,
                 AuthorizationRes, ChargeParameterReq, ChargeParameterRes, PowerDeliveryReq,
                 PowerDeliveryRes, MeteringReceiptReq, MeteringReceiptRes, SessionStopReq,
                 SessionStopRes, ChannelHello, ChannelAccept, ChannelFinished>;

struct V2GMessage {
    std::uint64_t session_id = 0;
    MessageBody body;

    MessageTag tag() const;
    bool operator==(const V2GMessage&) const = default;
};

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Canonical layout: tag (1) | session_id (8, big-endian) | length (4,
/// big-endian) | payload. Strings are u16 length + bytes, reals are IEEE-754
/// bit patterns in big-endian order.
Bytes encode(const V2GMessage& msg);
V2GMessage decode(std::span<const std::uint8_t> frame);

bool is_request(MessageTag tag);
bool is_response(MessageTag tag);
/// Response tag paired with a request tag. Throws std::invalid_argument for
/// non-request tags.
MessageTag response_for(MessageTag request);

std::string to_string(MessageTag tag);

}  // namespace evx::session
