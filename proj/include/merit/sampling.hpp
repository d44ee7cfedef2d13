#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "merit/model.hpp"

namespace merit {

// xoshiro256** seeded through splitmix64. Fixed algorithm so draws replay on any platform.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();
  // Unbiased integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t s_[4];
};

// Probabilities are quantized to multiples of 2^-40 before cumulation so every interval
// boundary is exact: p = 0 is never drawn, p = 1 always is, and exactly k items come out.
inline constexpr int kSamplingFractionBits = 40;

struct SampleTrace {
  std::vector<std::size_t> permutation;  // permutation[t] = candidate at shuffled position t
  std::uint64_t offset = 0;              // u scaled by 2^40
  double u = 0.0;
  IndexSet selection;                    // sorted candidate positions
};

// Systematic sampling: shuffle, cumulate, one uniform offset, k equally spaced points.
// Throws InvalidInput unless p is a valid marginal vector.
SampleTrace systematic_sample_trace(std::span<const double> p, std::uint64_t seed);
IndexSet systematic_sample(std::span<const double> p, std::uint64_t seed);

// Replayable record of one draw. Keys are sorted, so dump() is canonical.
nlohmann::json audit_record(std::span<const double> p, std::uint64_t seed, const IndexSet& selection);

struct AuditVerdict {
  bool ok = false;
  std::string reason;
};

AuditVerdict verify_audit(const nlohmann::json& record);

// Hex SHA-256 of the canonical text of p.
std::string marginals_digest(std::span<const double> p);

}  // namespace merit
