#include "evx/session/channel.hpp"

namespace evx::session {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    return fnv1a(h, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace

std::uint64_t SecureChannel::seal(std::span<const std::uint8_t> payload) const {
    // Length goes in last so that truncation changes the tag as well.
    std::uint64_t h = fnv1a(kFnvOffset ^ key, payload);
    h ^= payload.size();
    h *= kFnvPrime;
    return h;
}

bool SecureChannel::verify(std::span<const std::uint8_t> payload, std::uint64_t tag) const {
    return established && seal(payload) == tag;
}

SecureChannel establish_secure_channel(const ContractCredential& ev_cred, const Certificate& se_cert) {
    if (!ev_cred.valid) throw InvalidCertificate(ev_cred.certificate_id);
    if (!se_cert.valid) throw InvalidCertificate(se_cert.id);
    SecureChannel ch;
    ch.established = true;
    ch.ev_cert = ev_cred.certificate_id;
    ch.se_cert = se_cert.id;
    ch.key = fnv1a(fnv1a(kFnvOffset, ch.ev_cert) ^ 0x7c, ch.se_cert);
    return ch;
}

ChannelHandshake ChannelHandshake::initiator(ContractCredential own, const TrustStore& trust) {
    ChannelHandshake hs(true, trust);
    hs.ev_cred_ = std::move(own);
    return hs;
}

ChannelHandshake ChannelHandshake::responder(Certificate own, const TrustStore& trust) {
    ChannelHandshake hs(false, trust);
    hs.se_cert_ = std::move(own);
    return hs;
}

V2GMessage ChannelHandshake::hello() {
    status_ = Status::Pending;
    return V2GMessage{0, ChannelHello{ev_cred_.certificate_id}};
}

std::optional<V2GMessage> ChannelHandshake::on_message(const V2GMessage& msg) {
    if (status_ == Status::Up || status_ == Status::Failed) return std::nullopt;
    try {
        if (initiator_) {
            const auto* accept = std::get_if<ChannelAccept>(&msg.body);
            if (accept == nullptr || status_ != Status::Pending) return std::nullopt;
            channel_ = establish_secure_channel(
                ev_cred_, Certificate{accept->certificate_id, trust_->valid(accept->certificate_id)});
            status_ = Status::Up;
            return V2GMessage{0, ChannelFinished{}};
        }
        if (const auto* hello = std::get_if<ChannelHello>(&msg.body)) {
            ContractCredential peer{"", hello->certificate_id, trust_->valid(hello->certificate_id)};
            channel_ = establish_secure_channel(peer, se_cert_);
            status_ = Status::Pending;
            return V2GMessage{0, ChannelAccept{se_cert_.id}};
        }
        if (std::holds_alternative<ChannelFinished>(msg.body) && status_ == Status::Pending) {
            status_ = Status::Up;
        }
    } catch (const InvalidCertificate& e) {
        status_ = Status::Failed;
        failure_ = e.what();
        channel_ = SecureChannel{};
    }
    return std::nullopt;
}

}  // namespace evx::session
