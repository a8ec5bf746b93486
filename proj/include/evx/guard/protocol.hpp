#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evx/guard/guard.hpp"

namespace evx::guard {

using Bytes = std::vector<std::uint8_t>;

// Frame layouts: challenge/response are tag | index (u32 BE) | symbol;
// the S_SE report is tag | 2k symbols and travels over the secure channel.
inline constexpr std::uint8_t kChallengeTag = 0x40;
inline constexpr std::uint8_t kResponseTag = 0x41;
inline constexpr std::uint8_t kReportTag = 0x42;

struct ExchangeFrame {
    std::uint8_t tag = kChallengeTag;
    std::uint32_t index = 0;
    Symbol symbol = 0;
};

Bytes encode_exchange(const ExchangeFrame& f);
/// Returns nullopt for anything that is not a well-formed challenge/response.
std::optional<ExchangeFrame> decode_exchange(std::span<const std::uint8_t> bytes);

Bytes encode_report(std::span<const Symbol> s_se);
std::optional<Symbols> decode_report(std::span<const std::uint8_t> bytes);

bool is_guard_frame(std::span<const std::uint8_t> bytes);

/// EV side: sends the challenges, timestamps the responses and later checks
/// the report received over the secure channel. Transport-agnostic; the owner
/// moves bytes and arms one timer per exchange.
class Verifier {
public:
    enum class State { Idle, Exchanging, AwaitingReport, Done };

    struct Step {
        /// Next challenge to send, if any.
        std::optional<Bytes> send;
        /// Arm a timer for this exchange index (per_exchange_timeout).
        std::optional<std::uint32_t> arm_timeout;
        /// Set when the fast phase passed the timing check.
        bool timing_passed = false;
    };

    Verifier(DBConfig config, netsim::Rng& rng);

    Step begin(double now);
    /// Feeds a frame received during the fast phase. Stale or malformed
    /// responses are ignored.
    Step on_response(std::span<const std::uint8_t> bytes, double now);
    /// Timer expiry for exchange `index`; ignored if that exchange completed.
    void on_timeout(std::uint32_t index, double now);
    /// Feeds the S_SE report.
    void on_report(std::span<const std::uint8_t> bytes, double now);

    State state() const { return state_; }
    bool done() const { return state_ == State::Done; }
    const DBVerdict& verdict() const { return verdict_; }
    const DBConfig& config() const { return config_; }

    const Symbols& alpha() const { return alpha_; }
    const Symbols& beta_received() const { return beta_received_; }
    const std::vector<double>& rtts() const { return rtts_; }
    double started_at() const { return started_at_; }
    double finished_at() const { return finished_at_; }

private:
    Step send_current(double now);
    void finish(Outcome o, double now);

    DBConfig config_;
    Symbols alpha_;
    Symbols beta_received_;
    std::vector<double> rtts_;
    double rtt_sum_ = 0.0;
    std::uint32_t current_ = 0;
    double sent_at_ = 0.0;
    double started_at_ = 0.0;
    double finished_at_ = 0.0;
    State state_ = State::Idle;
    DBVerdict verdict_;
};

/// SE side: answers each challenge with its pre-generated symbol and records
/// what it received.
class Prover {
public:
    Prover(DBConfig config, netsim::Rng& rng);

    /// Response bytes for a well-formed challenge, nullopt otherwise.
    std::optional<Bytes> on_challenge(std::span<const std::uint8_t> bytes);

    /// S_SE = interleave(alpha_received, beta). Empty body when any challenge
    /// is missing, which the verifier rejects.
    Bytes report() const;

    const Symbols& beta() const { return beta_; }
    const Symbols& alpha_received() const { return alpha_received_; }
    bool complete() const;

private:
    DBConfig config_;
    Symbols beta_;
    Symbols alpha_received_;
    std::vector<bool> seen_;
};

}  // namespace evx::guard
