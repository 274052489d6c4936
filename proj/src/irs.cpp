// SPDX-License-Identifier: Apache-2.0

#include "irshield/irs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "irshield/errors.hpp"

namespace irshield {

IrsConfig::IrsConfig(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw ContractViolation("IrsConfig: bits must be 0 or 1");
  }
}

IrsConfig IrsConfig::random(std::size_t m, Engine& rng) {
  std::vector<std::uint8_t> bits(m);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return IrsConfig(std::move(bits));
}

void IrsConfig::invert() {
  for (auto& b : bits_) b ^= 1;
}

std::string IrsConfig::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  const std::size_t n_bytes = (bits_.size() + 7) / 8;
  out.reserve(2 * n_bytes);
  for (std::size_t byte = 0; byte < n_bytes; ++byte) {
    unsigned v = 0;
    for (std::size_t bit = 0; bit < 8; ++bit) {
      const std::size_t m = byte * 8 + bit;
      if (m < bits_.size() && bits_[m]) v |= 1u << bit;
    }
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xF]);
  }
  return out;
}

IrsConfig IrsConfig::from_hex(std::string_view hex, std::size_t m) {
  if (hex.size() != 2 * ((m + 7) / 8)) throw ContractViolation("IrsConfig::from_hex: length mismatch");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw ContractViolation("IrsConfig::from_hex: invalid digit");
  };
  std::vector<std::uint8_t> bits(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t byte = i / 8;
    const unsigned v = (nibble(hex[2 * byte]) << 4) | nibble(hex[2 * byte + 1]);
    bits[i] = static_cast<std::uint8_t>((v >> (i % 8)) & 1u);
  }
  return IrsConfig(std::move(bits));
}

std::size_t hamming_distance(const IrsConfig& a, const IrsConfig& b) {
  if (a.size() != b.size()) throw ContractViolation("hamming_distance: configurations differ in length");
  std::size_t d = 0;
  for (std::size_t m = 0; m < a.size(); ++m) d += a[m] != b[m];
  return d;
}

void IrsAlgParams::validate() const {
  if (!(progression_rate > 0.0 && progression_rate <= 0.5))
    throw ContractViolation("progression rate must lie in (0, 0.5]");
  if (!(hold_probability >= 0.0 && hold_probability < 1.0))
    throw ContractViolation("hold probability must lie in [0, 1)");
  if (!(update_rate > 0.0)) throw ContractViolation("update rate must be positive");
}

IrsAlgState::IrsAlgState(std::size_t m, IrsAlgParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  params_.validate();
  cfg_ = IrsConfig::random(m, rng_);
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  init_active(std::move(all));
}

IrsAlgState::IrsAlgState(std::size_t m, IrsAlgParams params, std::uint64_t seed,
                         std::vector<std::size_t> active)
    : params_(params), rng_(seed) {
  params_.validate();
  cfg_ = IrsConfig::random(m, rng_);
  init_subset(std::move(active));
}

IrsAlgState::IrsAlgState(IrsConfig initial, IrsAlgParams params, std::uint64_t seed,
                         std::vector<std::size_t> active)
    : cfg_(std::move(initial)), params_(params), rng_(seed) {
  params_.validate();
  init_subset(std::move(active));
}

void IrsAlgState::init_subset(std::vector<std::size_t> active) {
  for (auto i : active) {
    if (i >= cfg_.size()) throw ContractViolation("IrsAlgState: active element index out of range");
  }
  std::sort(active.begin(), active.end());
  if (std::adjacent_find(active.begin(), active.end()) != active.end())
    throw ContractViolation("IrsAlgState: duplicate active element");
  init_active(std::move(active));
}

IrsAlgState::IrsAlgState(IrsConfig initial, IrsAlgParams params, std::uint64_t seed)
    : cfg_(std::move(initial)), params_(params), rng_(seed) {
  params_.validate();
  std::vector<std::size_t> all(cfg_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  init_active(std::move(all));
}

void IrsAlgState::init_active(std::vector<std::size_t> active) {
  active_ = std::move(active);
  scratch_.resize(active_.size());
  const double want = std::ceil(params_.progression_rate * static_cast<double>(active_.size()));
  flip_count_ = std::min(active_.size(), static_cast<std::size_t>(want));
}

StepOutcome IrsAlgState::step() {
  StepOutcome out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng_) < params_.hold_probability) {
    out.held = true;
    return out;
  }
  out.executed = next_;
  if (next_ == AlgPhase::Rand) {
    // Partial Fisher-Yates over the active list: first flip_count_ entries are
    // a uniform draw without replacement.
    std::copy(active_.begin(), active_.end(), scratch_.begin());
    const std::size_t n = scratch_.size();
    for (std::size_t i = 0; i < flip_count_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(scratch_[i], scratch_[pick(rng_)]);
      cfg_.flip(scratch_[i]);
    }
    out.changed = flip_count_ > 0;
    next_ = AlgPhase::Flip;
  } else {
    if (params_.inversion_enabled) {
      for (auto m : active_) cfg_.flip(m);
      out.changed = !active_.empty();
    }
    next_ = AlgPhase::Rand;
  }
  return out;
}

std::vector<double> hamming_trace(std::size_t m, const IrsAlgParams& params, std::size_t n_steps,
                                  std::size_t n_ensemble, std::uint64_t seed) {
  if (n_ensemble < 1) throw ContractViolation("hamming_trace: ensemble must be nonempty");
  std::vector<double> sum(n_steps + 1, 0.0);
  for (std::size_t run = 0; run < n_ensemble; ++run) {
    IrsAlgState state(m, params, derive_seed(seed, Stream::Ensemble, run));
    const IrsConfig initial = state.config();
    for (std::size_t t = 1; t <= n_steps; ++t) {
      state.step();
      sum[t] += static_cast<double>(hamming_distance(state.config(), initial));
    }
  }
  for (auto& s : sum) s /= static_cast<double>(n_ensemble);
  return sum;
}

}  // namespace irshield
