#pragma once

// Truncation rules as pure functions from a ranked distribution to the size
// of the surviving rank prefix. Every rule keeps a prefix of the ranking, so
// the size alone determines the allowed set.
//
// A cut that would land beyond the exported top-N raises
// Error(rank_overflow): clamping it would silently shrink the allowed set.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "cptrie/dist_io.hpp"

namespace cptrie {

enum class Method { top_k, top_p, eta, mirostat, adaptive };

inline constexpr Method kAllMethods[] = {Method::adaptive, Method::eta, Method::mirostat, Method::top_k,
                                         Method::top_p};

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);

struct SamplerConfig {
  Method method = Method::top_k;
  // k (integer) for top_k, p in (0, 1] for top_p, epsilon > 0 for eta,
  // tau > 0 in bits for mirostat, delta-conf > 0 for adaptive.
  double theta = 1.0;
};

// Throws Error(invalid_argument) if theta is outside the method's domain.
void check_theta(const SamplerConfig& config);

std::size_t top_k_size(const DistributionRecord& record, std::size_t k);

// Smallest j whose cumulative probability reaches p (within 1e-12).
std::size_t top_p_size(const DistributionRecord& record, double p);

// Keeps tokens with prob > min(epsilon, sqrt(epsilon) * exp(-H)), H being the
// full-distribution entropy in nats.
std::size_t eta_size(const DistributionRecord& record, double epsilon);
double eta_threshold(double epsilon, double entropy_nats);

// Least-squares Zipf exponent over the top min(100, N-1) adjacent rank pairs.
double zipf_exponent(const DistributionRecord& record);

// Single-step Mirostat cut with mu = 2 tau: k = (eps * 2^mu / (1 - V^-eps))^(1/s)
// with eps = s - 1, rounded to the nearest integer. Throws
// Error(degenerate_zipf) when the estimated exponent is <= 1.
std::size_t mirostat_size(const DistributionRecord& record, double tau);

// Feedback step of the autoregressive variant; the per-node protocol does
// not chain steps, so this is provided for completeness only.
double mirostat_update_mu(double mu, double tau, double observed_surprise_bits, double learning_rate);

// Entropy (nats) of each renormalized top-j prefix, j = 1..N, via
// H_j = ln S_j - U_j / S_j with S_j = sum p_i and U_j = sum p_i ln p_i.
std::vector<double> truncated_entropies(const DistributionRecord& record);

// First j at which the min-max scaled truncated entropy grows by less than
// delta_conf when token j+1 is added; N if that never happens.
std::size_t adaptive_size(const DistributionRecord& record, double delta_conf);

std::size_t allowed_set_size(const DistributionRecord& record, const SamplerConfig& config);

}  // namespace cptrie
