#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "evx/session/messages.hpp"

namespace evx::session {

/// Plug-and-Charge credential installed in an EV.
struct ContractCredential {
    std::string contract_id;
    std::string certificate_id;
    bool valid = true;
};

/// Certificate presented by a charging station.
struct Certificate {
    std::string id;
    bool valid = true;
};

class InvalidCertificate : public std::runtime_error {
public:
    explicit InvalidCertificate(const std::string& id)
        : std::runtime_error("invalid certificate: " + id) {}
};

/// Stand-in for an established TLS session. Payloads sent over it are opaque to
/// forwarders, and each one carries a keyed integrity tag so that any change
/// made in transit is detected by the receiver.
///
/// This is not cryptography: the key is derived from public identifiers. It
/// only has to model that a relay without credentials cannot produce a valid
/// tag for altered bytes.
struct SecureChannel {
    bool established = false;
    std::string ev_cert;
    std::string se_cert;
    std::uint64_t key = 0;

    std::uint64_t seal(std::span<const std::uint8_t> payload) const;
    bool verify(std::span<const std::uint8_t> payload, std::uint64_t tag) const;
};

/// Both sides must hold valid certificates; throws InvalidCertificate otherwise.
SecureChannel establish_secure_channel(const ContractCredential& ev_cred, const Certificate& se_cert);

/// Certificate validity as known to every honest party (the PKI).
class TrustStore {
public:
    void add(const std::string& cert_id, bool valid) { certs_[cert_id] = valid; }
    bool valid(const std::string& cert_id) const {
        auto it = certs_.find(cert_id);
        return it != certs_.end() && it->second;
    }

private:
    std::map<std::string, bool> certs_;
};

/// Three-leg handshake driving establish_secure_channel on both ends:
/// ChannelHello(ev cert) -> ChannelAccept(se cert) -> ChannelFinished.
/// The responder considers the channel up once ChannelFinished arrives.
class ChannelHandshake {
public:
    enum class Status { Idle, Pending, Up, Failed };

    static ChannelHandshake initiator(ContractCredential own, const TrustStore& trust);
    static ChannelHandshake responder(Certificate own, const TrustStore& trust);

    /// Initiator only: the opening message.
    V2GMessage hello();

    /// Feeds one handshake message. Returns the reply to send, if any.
    std::optional<V2GMessage> on_message(const V2GMessage& msg);

    Status status() const { return status_; }
    const SecureChannel& channel() const { return channel_; }
    const std::string& failure() const { return failure_; }

private:
    ChannelHandshake(bool initiator, const TrustStore& trust) : initiator_(initiator), trust_(&trust) {}

    bool initiator_;
    const TrustStore* trust_;
    ContractCredential ev_cred_;
    Certificate se_cert_;
    SecureChannel channel_;
    Status status_ = Status::Idle;
    std::string failure_;
};

}  // namespace evx::session
