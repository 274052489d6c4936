// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irshield/random.hpp"

namespace irshield {

// Binary surface configuration; bit m selects the reflection state of element m.
class IrsConfig {
 public:
  IrsConfig() = default;
  explicit IrsConfig(std::size_t m, std::uint8_t value = 0) : bits_(m, value ? 1 : 0) {}
  explicit IrsConfig(std::vector<std::uint8_t> bits);

  static IrsConfig random(std::size_t m, Engine& rng);

  std::size_t size() const noexcept { return bits_.size(); }
  std::uint8_t operator[](std::size_t m) const { return bits_[m]; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  void set(std::size_t m, std::uint8_t value) { bits_[m] = value ? 1 : 0; }
  void flip(std::size_t m) { bits_[m] ^= 1; }
  void invert();

  // Little-endian bitstring: bit m lives in byte m/8 at position m%8; bytes in order.
  std::string to_hex() const;
  static IrsConfig from_hex(std::string_view hex, std::size_t m);

  bool operator==(const IrsConfig&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Binary-phase reflection coefficient: state 0 -> -1, state 1 -> +1.
constexpr double map_coefficient(std::uint8_t bit) { return bit ? 1.0 : -1.0; }

std::size_t hamming_distance(const IrsConfig& a, const IrsConfig& b);

enum class AlgPhase : std::uint8_t { Rand, Flip };

struct IrsAlgParams {
  double progression_rate = 0.05;  // R
  double hold_probability = 0.6;   // P_hold
  double update_rate = 20.0;       // ticks per second
  bool inversion_enabled = true;   // FLIP ticks become no-ops when false

  void validate() const;
};

struct StepOutcome {
  bool changed = false;
  bool held = false;
  AlgPhase executed = AlgPhase::Rand;  // meaningful only when !held
};

// Randomized configuration generator. Each step() is one tick: with probability
// P_hold nothing happens, otherwise the pending phase executes. RAND flips
// ceil(R*M_active) distinct active elements, FLIP inverts every active element.
// Elements outside the active set keep their initial state forever.
class IrsAlgState {
 public:
  IrsAlgState(std::size_t m, IrsAlgParams params, std::uint64_t seed);
  IrsAlgState(std::size_t m, IrsAlgParams params, std::uint64_t seed,
              std::vector<std::size_t> active);
  IrsAlgState(IrsConfig initial, IrsAlgParams params, std::uint64_t seed);
  IrsAlgState(IrsConfig initial, IrsAlgParams params, std::uint64_t seed,
              std::vector<std::size_t> active);

  StepOutcome step();

  const IrsConfig& config() const noexcept { return cfg_; }
  AlgPhase next_phase() const noexcept { return next_; }
  const IrsAlgParams& params() const noexcept { return params_; }
  std::size_t active_count() const noexcept { return active_.size(); }
  // Number of elements a RAND phase flips.
  std::size_t rand_flip_count() const noexcept { return flip_count_; }

 private:
  void init_active(std::vector<std::size_t> active);
  void init_subset(std::vector<std::size_t> active);

  IrsConfig cfg_;
  AlgPhase next_ = AlgPhase::Rand;
  IrsAlgParams params_;
  Engine rng_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> scratch_;
  std::size_t flip_count_ = 0;
};

// Mean Hamming distance to the t=0 configuration after each tick, averaged over
// n_ensemble independent runs. Element 0 is always 0; length n_steps + 1.
std::vector<double> hamming_trace(std::size_t m, const IrsAlgParams& params, std::size_t n_steps,
                                  std::size_t n_ensemble, std::uint64_t seed);

}  // namespace irshield
