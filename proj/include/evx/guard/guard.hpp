#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evx/netsim/rng.hpp"

namespace evx::guard {

using Symbol = std::uint8_t;
using Symbols = std::vector<Symbol>;

class BadConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyInput : public std::invalid_argument {
public:
    EmptyInput() : std::invalid_argument("no samples") {}
};

class LengthMismatch : public std::invalid_argument {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : std::invalid_argument("sequence lengths differ: " + std::to_string(a) + " vs " +
                                std::to_string(b)) {}
};

struct DBConfig {
    std::uint32_t k = 100;
    std::uint32_t N = 128;
    double mu_max = 2e-3;
    double sigma_max = 0.5e-3;
    double per_exchange_timeout = 0.05;
    /// Stop the fast exchange as soon as the RTTs collected so far already
    /// force mu > mu_max. The verdict is unchanged; only the transcript is
    /// shorter and the alert arrives sooner.
    bool early_abort = true;

    /// Throws BadConfig naming the first invalid field.
    void validate() const;
    bool operator==(const DBConfig&) const = default;
};

enum class Outcome { Accept, TimingAlert, IntegrityAlert, Timeout };

std::string to_string(Outcome o);
/// Inverse of to_string; throws std::invalid_argument.
Outcome outcome_from_string(const std::string& s);

struct DBTranscript {
    Symbols alpha;
    Symbols beta;
    Symbols alpha_received;
    Symbols beta_received;
    std::vector<double> rtts;
};

struct DBVerdict {
    Outcome outcome = Outcome::Timeout;
    double mu = 0.0;
    double sigma = 0.0;
};

struct RttStats {
    double mu = 0.0;
    double sigma = 0.0;
};

/// k symbols uniform over [0, N). Throws BadConfig for k == 0 or N outside [2, 256].
Symbols generate_challenge(netsim::Rng& rng, std::uint32_t k, std::uint32_t N);

/// Arithmetic mean and population standard deviation.
RttStats compute_stats(std::span<const double> rtts);

/// TimingAlert iff mu > mu_max or sigma > sigma_max; Accept otherwise.
Outcome check_thresholds(double mu, double sigma, const DBConfig& config);

/// [a1, b1, a2, b2, ...]. Throws LengthMismatch.
Symbols interleave(std::span<const Symbol> alpha, std::span<const Symbol> beta);

/// Accept iff both sequences are identical, IntegrityAlert otherwise.
Outcome verify_transcript(std::span<const Symbol> s_ev, std::span<const Symbol> s_se);

}  // namespace evx::guard
