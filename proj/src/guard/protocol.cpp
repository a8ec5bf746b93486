#include "evx/guard/protocol.hpp"

#include <algorithm>

namespace evx::guard {

Bytes encode_exchange(const ExchangeFrame& f) {
    return Bytes{f.tag,
                 static_cast<std::uint8_t>(f.index >> 24),
                 static_cast<std::uint8_t>(f.index >> 16),
                 static_cast<std::uint8_t>(f.index >> 8),
                 static_cast<std::uint8_t>(f.index),
                 f.symbol};
}

std::optional<ExchangeFrame> decode_exchange(std::span<const std::uint8_t> b) {
    if (b.size() != 6 || (b[0] != kChallengeTag && b[0] != kResponseTag)) return std::nullopt;
    ExchangeFrame f;
    f.tag = b[0];
    f.index = (std::uint32_t{b[1]} << 24) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 8) |
              std::uint32_t{b[4]};
    f.symbol = b[5];
    return f;
}

Bytes encode_report(std::span<const Symbol> s_se) {
    Bytes out;
    out.reserve(1 + s_se.size());
    out.push_back(kReportTag);
    out.insert(out.end(), s_se.begin(), s_se.end());
    return out;
}

std::optional<Symbols> decode_report(std::span<const std::uint8_t> b) {
    if (b.empty() || b[0] != kReportTag) return std::nullopt;
    return Symbols(b.begin() + 1, b.end());
}

bool is_guard_frame(std::span<const std::uint8_t> b) {
    return !b.empty() && b[0] >= kChallengeTag && b[0] <= kReportTag;
}

Verifier::Verifier(DBConfig config, netsim::Rng& rng) : config_(config) {
    config_.validate();
    alpha_ = generate_challenge(rng, config_.k, config_.N);
}

Verifier::Step Verifier::begin(double now) {
    if (state_ != State::Idle) return {};
    state_ = State::Exchanging;
    started_at_ = now;
    return send_current(now);
}

Verifier::Step Verifier::send_current(double now) {
    sent_at_ = now;
    Step s;
    s.send = encode_exchange({kChallengeTag, current_, alpha_[current_]});
    s.arm_timeout = current_;
    return s;
}

Verifier::Step Verifier::on_response(std::span<const std::uint8_t> bytes, double now) {
    if (state_ != State::Exchanging) return {};
    const auto f = decode_exchange(bytes);
    if (!f || f->tag != kResponseTag || f->index != current_) return {};

    const double rtt = now - sent_at_;
    beta_received_.push_back(f->symbol);
    rtts_.push_back(rtt);
    rtt_sum_ += rtt;

    // Every later RTT is positive, so the final mean can only be larger.
    if (config_.early_abort && rtt_sum_ > config_.k * config_.mu_max) {
        finish(Outcome::TimingAlert, now);
        return {};
    }
    if (++current_ < config_.k) return send_current(now);

    const RttStats st = compute_stats(rtts_);
    verdict_.mu = st.mu;
    verdict_.sigma = st.sigma;
    if (check_thresholds(st.mu, st.sigma, config_) != Outcome::Accept) {
        finish(Outcome::TimingAlert, now);
        return {};
    }
    state_ = State::AwaitingReport;
    Step s;
    s.timing_passed = true;
    return s;
}

void Verifier::on_timeout(std::uint32_t index, double now) {
    if (state_ != State::Exchanging || index != current_) return;
    finish(Outcome::Timeout, now);
}

void Verifier::on_report(std::span<const std::uint8_t> bytes, double now) {
    if (state_ != State::AwaitingReport) return;
    const auto s_se = decode_report(bytes);
    const Symbols s_ev = interleave(alpha_, beta_received_);
    state_ = State::Done;
    finished_at_ = now;
    verdict_.outcome = s_se ? verify_transcript(s_ev, *s_se) : Outcome::IntegrityAlert;
}

void Verifier::finish(Outcome o, double now) {
    state_ = State::Done;
    finished_at_ = now;
    verdict_.outcome = o;
    if (!rtts_.empty()) {
        const RttStats st = compute_stats(rtts_);
        verdict_.mu = st.mu;
        verdict_.sigma = st.sigma;
    }
}

Prover::Prover(DBConfig config, netsim::Rng& rng) : config_(config) {
    config_.validate();
    beta_ = generate_challenge(rng, config_.k, config_.N);
    alpha_received_.assign(config_.k, 0);
    seen_.assign(config_.k, false);
}

std::optional<Bytes> Prover::on_challenge(std::span<const std::uint8_t> bytes) {
    const auto f = decode_exchange(bytes);
    if (!f || f->tag != kChallengeTag || f->index >= config_.k) return std::nullopt;
    alpha_received_[f->index] = f->symbol;
    seen_[f->index] = true;
    return encode_exchange({kResponseTag, f->index, beta_[f->index]});
}

bool Prover::complete() const {
    return std::all_of(seen_.begin(), seen_.end(), [](bool b) { return b; });
}

Bytes Prover::report() const {
    if (!complete()) return encode_report({});
    return encode_report(interleave(alpha_received_, beta_));
}

}  // namespace evx::guard
