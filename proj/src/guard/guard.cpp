#include "evx/guard/guard.hpp"

#include <algorithm>
#include <cmath>

namespace evx::guard {

void DBConfig::validate() const {
    if (k < 1) throw BadConfig("k must be at least 1");
    if (N < 2 || N > 256) throw BadConfig("N must lie in [2, 256]");
    if (!(mu_max > 0.0)) throw BadConfig("mu_max must be positive");
    if (!(sigma_max > 0.0)) throw BadConfig("sigma_max must be positive");
    if (!(per_exchange_timeout > 0.0)) throw BadConfig("per_exchange_timeout must be positive");
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Accept: return "Accept";
        case Outcome::TimingAlert: return "TimingAlert";
        case Outcome::IntegrityAlert: return "IntegrityAlert";
        case Outcome::Timeout: return "Timeout";
    }
    return "?";
}

Outcome outcome_from_string(const std::string& s) {
    for (Outcome o : {Outcome::Accept, Outcome::TimingAlert, Outcome::IntegrityAlert, Outcome::Timeout}) {
        if (to_string(o) == s) return o;
    }
    throw std::invalid_argument("unknown verdict: " + s);
}

Symbols generate_challenge(netsim::Rng& rng, std::uint32_t k, std::uint32_t N) {
    if (k < 1) throw BadConfig("k must be at least 1");
    if (N < 2 || N > 256) throw BadConfig("N must lie in [2, 256]");
    Symbols out(k);
    for (auto& s : out) s = static_cast<Symbol>(rng.uniform_below(N));
    return out;
}

RttStats compute_stats(std::span<const double> rtts) {
    if (rtts.empty()) throw EmptyInput();
    const auto [lo, hi] = std::minmax_element(rtts.begin(), rtts.end());
    if (*lo == *hi) return {*lo, 0.0};

    const double n = static_cast<double>(rtts.size());
    double sum = 0.0;
    for (double x : rtts) sum += x;
    const double mean = sum / n;

    // Two-pass variance; the second term cancels the rounding left in `mean`.
    double sq = 0.0;
    double dev = 0.0;
    for (double x : rtts) {
        const double d = x - mean;
        sq += d * d;
        dev += d;
    }
    const double var = std::max(0.0, (sq - dev * dev / n) / n);
    return {mean, std::sqrt(var)};
}

Outcome check_thresholds(double mu, double sigma, const DBConfig& config) {
    return (mu > config.mu_max || sigma > config.sigma_max) ? Outcome::TimingAlert : Outcome::Accept;
}

Symbols interleave(std::span<const Symbol> alpha, std::span<const Symbol> beta) {
    if (alpha.size() != beta.size()) throw LengthMismatch(alpha.size(), beta.size());
    Symbols out;
    out.reserve(2 * alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out.push_back(alpha[i]);
        out.push_back(beta[i]);
    }
    return out;
}

Outcome verify_transcript(std::span<const Symbol> s_ev, std::span<const Symbol> s_se) {
    return std::equal(s_ev.begin(), s_ev.end(), s_se.begin(), s_se.end()) ? Outcome::Accept
                                                                          : Outcome::IntegrityAlert;
}

}  // namespace evx::guard
