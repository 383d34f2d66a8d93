#include "cptrie/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cptrie/error.hpp"

namespace cptrie {
namespace {

constexpr double kCumulativeSlack = 1e-12;
constexpr std::size_t kZipfPairs = 100;

[[noreturn]] void rank_overflow(const DistributionRecord& record, std::string_view method, std::string detail) {
  throw Error(ErrorCode::rank_overflow, "prefix \"" + record.prefix_id + "\": " + std::string(method) + " cut " +
                                            detail + " falls beyond the " + std::to_string(record.listed()) +
                                            " exported tokens (vocab " + std::to_string(record.vocab_size) +
                                            "); re-export with a larger top-N");
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::top_k: return "top_k";
    case Method::top_p: return "top_p";
    case Method::eta: return "eta";
    case Method::mirostat: return "mirostat";
    case Method::adaptive: return "adaptive";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

void check_theta(const SamplerConfig& config) {
  const double t = config.theta;
  const auto fail = [&](const char* domain) {
    throw Error(ErrorCode::invalid_argument,
                std::string(method_name(config.method)) + " parameter " + std::to_string(t) + " outside " + domain);
  };
  if (!std::isfinite(t)) fail("the finite reals");
  switch (config.method) {
    case Method::top_k:
      if (t < 1.0 || t > 1e15 || std::floor(t) != t) fail("the positive integers");
      break;
    case Method::top_p:
      if (!(t > 0.0 && t <= 1.0)) fail("(0, 1]");
      break;
    case Method::eta:
    case Method::mirostat:
    case Method::adaptive:
      if (!(t > 0.0)) fail("(0, inf)");
      break;
  }
}

std::size_t top_k_size(const DistributionRecord& record, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "top_k requires k >= 1");
  const std::size_t wanted = std::min(k, record.vocab_size);
  if (wanted > record.listed()) rank_overflow(record, "top_k", "at rank " + std::to_string(wanted));
  return wanted;
}

std::size_t top_p_size(const DistributionRecord& record, double p) {
  double cumulative = 0.0;
  for (std::size_t j = 0; j < record.listed(); ++j) {
    cumulative += record.tokens[j].prob;
    if (cumulative >= p - kCumulativeSlack) return j + 1;
  }
  if (record.tail_mass > 0.0 && !record.fully_listed())
    rank_overflow(record, "top_p", "for p = " + std::to_string(p));
  return record.listed();
}

double eta_threshold(double epsilon, double entropy_nats) {
  return std::min(epsilon, std::sqrt(epsilon) * std::exp(-entropy_nats));
}

std::size_t eta_size(const DistributionRecord& record, double epsilon) {
  const double eta = eta_threshold(epsilon, record.entropy_nats);
  const auto& tokens = record.tokens;
  const auto first_out =
      std::find_if(tokens.begin(), tokens.end(), [eta](const TokenEntry& t) { return !(t.prob > eta); });
  if (first_out == tokens.end() && record.tail_mass > 0.0 && !record.fully_listed())
    rank_overflow(record, "eta", "at threshold " + std::to_string(eta));
  return std::max<std::size_t>(1, static_cast<std::size_t>(first_out - tokens.begin()));
}

double zipf_exponent(const DistributionRecord& record) {
  const std::size_t pairs = std::min(kZipfPairs, record.listed() - 1);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 1; i <= pairs; ++i) {
    const double next = record.tokens[i].prob;
    if (next <= 0.0) continue;
    const double t = std::log(static_cast<double>(i + 1) / static_cast<double>(i));
    const double b = std::log(record.tokens[i - 1].prob / next);
    num += t * b;
    den += t * t;
  }
  return den > 0.0 ? num / den : 0.0;
}

std::size_t mirostat_size(const DistributionRecord& record, double tau) {
  if (record.listed() < 2) return 1;
  const double s = zipf_exponent(record);
  const double eps = s - 1.0;
  if (!(eps > 0.0))
    throw Error(ErrorCode::degenerate_zipf,
                "prefix \"" + record.prefix_id + "\": estimated Zipf exponent " + std::to_string(s) + " <= 1");
  const double mu = 2.0 * tau;
  const double log_v = std::log(static_cast<double>(record.vocab_size));
  // ln k = (ln eps + mu ln 2 - ln(1 - V^-eps)) / s, kept in log space so large
  // mu cannot overflow before the root is taken.
  const double log_k = (std::log(eps) + mu * std::log(2.0) - std::log(-std::expm1(-eps * log_v))) / s;
  const double k_real = std::exp(log_k);
  const double cap = static_cast<double>(record.vocab_size) + 1.0;
  const auto k = static_cast<std::size_t>(std::max(1.0, std::round(std::min(k_real, cap))));
  if (k > record.listed()) {
    if (!record.fully_listed()) rank_overflow(record, "mirostat", "at rank " + std::to_string(k));
    return record.listed();
  }
  return k;
}

double mirostat_update_mu(double mu, double tau, double observed_surprise_bits, double learning_rate) {
  return mu - learning_rate * (observed_surprise_bits - tau);
}

std::vector<double> truncated_entropies(const DistributionRecord& record) {
  std::vector<double> h;
  h.reserve(record.listed());
  double s = 0.0;
  double u = 0.0;
  for (const auto& t : record.tokens) {
    s += t.prob;
    u += t.prob * std::log(t.prob);
    h.push_back(std::log(s) - u / s);
  }
  return h;
}

std::size_t adaptive_size(const DistributionRecord& record, double delta_conf) {
  const std::vector<double> h = truncated_entropies(record);
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return 1;
  for (std::size_t j = 0; j + 1 < h.size(); ++j) {
    const double step = (h[j + 1] - h[j]) / range;
    if (step < delta_conf) return j + 1;
  }
  return h.size();
}

std::size_t allowed_set_size(const DistributionRecord& record, const SamplerConfig& config) {
  check_theta(config);
  switch (config.method) {
    case Method::top_k: return top_k_size(record, static_cast<std::size_t>(config.theta));
    case Method::top_p: return top_p_size(record, config.theta);
    case Method::eta: return eta_size(record, config.theta);
    case Method::mirostat: return mirostat_size(record, config.theta);
    case Method::adaptive: return adaptive_size(record, config.theta);
  }
  return 1;
}

}  // namespace cptrie
