#include "merit/sampling.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "merit/error.hpp"

namespace merit {
namespace {

constexpr std::uint64_t kOne = std::uint64_t{1} << kSamplingFractionBits;
constexpr const char* kAlgorithm = "systematic-xoshiro256starstar-fixed40";

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Integer masses summing to exactly k * 2^40; entries equal to 0 or 1 stay exact.
std::vector<std::uint64_t> quantize(std::span<const double> p, std::size_t k) {
  const double scale = static_cast<double>(kOne);
  std::vector<std::uint64_t> q(p.size());
  std::vector<std::size_t> adjustable;
  long long total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) {
      q[i] = 0;
    } else if (p[i] >= 1.0) {
      q[i] = kOne;
    } else {
      q[i] = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(p[i] * scale)), 0, kOne);
      adjustable.push_back(i);
    }
    total += static_cast<long long>(q[i]);
  }
  long long gap = static_cast<long long>(k) * static_cast<long long>(kOne) - total;
  if (gap == 0) return q;
  // Largest remainders take the rounding gap first.
  std::sort(adjustable.begin(), adjustable.end(), [&](std::size_t a, std::size_t b) {
    const double ra = p[a] * scale - static_cast<double>(q[a]);
    const double rb = p[b] * scale - static_cast<double>(q[b]);
    if (ra != rb) return gap > 0 ? ra > rb : ra < rb;
    return a < b;
  });
  while (gap != 0) {
    bool moved = false;
    for (std::size_t i : adjustable) {
      if (gap > 0 && q[i] < kOne) {
        ++q[i];
        --gap;
        moved = true;
      } else if (gap < 0 && q[i] > 0) {
        --q[i];
        ++gap;
        moved = true;
      }
      if (gap == 0) break;
    }
    if (!moved) throw InvalidInput("marginals cannot be quantized to the budget");
  }
  return q;
}

nlohmann::json to_json_array(const std::vector<std::size_t>& values) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t v : values) out.push_back(v);
  return out;
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (std::uint64_t& word : s_) word = splitmix64(seed);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::below(std::uint64_t bound) {
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

SampleTrace systematic_sample_trace(std::span<const double> p, std::uint64_t seed) {
  long double sum = 0.0L;
  for (double x : p) sum += x;
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(sum)));
  check_marginals(p, k);
  const std::vector<std::uint64_t> q = quantize(p, k);

  Xoshiro256 rng(seed);
  SampleTrace trace;
  trace.permutation.resize(p.size());
  std::iota(trace.permutation.begin(), trace.permutation.end(), std::size_t{0});
  for (std::size_t t = p.size(); t > 1; --t) {
    std::swap(trace.permutation[t - 1], trace.permutation[rng.below(t)]);
  }
  trace.offset = rng() >> (64 - kSamplingFractionBits);
  trace.u = std::ldexp(static_cast<double>(trace.offset), -kSamplingFractionBits);

  std::uint64_t cumulative = 0;
  std::uint64_t point = trace.offset;
  std::size_t drawn = 0;
  for (std::size_t i : trace.permutation) {
    const std::uint64_t next = cumulative + q[i];
    if (drawn < k && point < next) {
      trace.selection.push_back(i);
      ++drawn;
      point += kOne;
    }
    cumulative = next;
  }
  std::sort(trace.selection.begin(), trace.selection.end());
  return trace;
}

IndexSet systematic_sample(std::span<const double> p, std::uint64_t seed) {
  return systematic_sample_trace(p, seed).selection;
}

std::string marginals_digest(std::span<const double> p) {
  std::string text;
  char buffer[40];
  for (double x : p) {
    std::snprintf(buffer, sizeof buffer, "%.17g,", x);
    text += buffer;
  }
  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(text.data(), text.size(), hash, &length, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int b = 0; b < length; ++b) {
    std::snprintf(buffer, sizeof buffer, "%02x", hash[b]);
    hex += buffer;
  }
  return hex;
}

nlohmann::json audit_record(std::span<const double> p, std::uint64_t seed,
                            const IndexSet& selection) {
  const SampleTrace trace = systematic_sample_trace(p, seed);
  nlohmann::json record;
  record["algorithm"] = kAlgorithm;
  record["seed"] = seed;
  record["marginals"] = std::vector<double>(p.begin(), p.end());
  record["marginals_sha256"] = marginals_digest(p);
  record["permutation"] = to_json_array(trace.permutation);
  record["offset"] = trace.offset;
  record["u"] = trace.u;
  record["selection"] = to_json_array(selection);
  return record;
}

AuditVerdict verify_audit(const nlohmann::json& record) {
  try {
    if (record.at("algorithm") != kAlgorithm) return {false, "unknown sampling algorithm"};
    const auto p = record.at("marginals").get<std::vector<double>>();
    if (marginals_digest(p) != record.at("marginals_sha256").get<std::string>()) {
      return {false, "marginals do not match their recorded digest"};
    }
    const SampleTrace replay = systematic_sample_trace(p, record.at("seed").get<std::uint64_t>());
    if (record.at("permutation").get<std::vector<std::size_t>>() != replay.permutation) {
      return {false, "shuffle permutation differs from replay"};
    }
    if (record.at("offset").get<std::uint64_t>() != replay.offset) {
      return {false, "uniform offset differs from replay"};
    }
    if (record.at("selection").get<std::vector<std::size_t>>() != replay.selection) {
      return {false, "selection differs from replay"};
    }
  } catch (const std::exception& error) {
    return {false, std::string("malformed audit record: ") + error.what()};
  }
  return {true, ""};
}

}  // namespace merit
