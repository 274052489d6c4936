// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "irshield/channel.hpp"

namespace irshield {

// Identifies where an observation came from.
struct Provenance {
  std::string source;  // scenario name or input file
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Averaged sliding-window standard deviation of CSI magnitudes. values[i]
// belongs to frame first_index + i (the last frame of its trailing window).
struct ObservationSeries {
  std::vector<double> values;
  double sample_rate = 70.0;
  double window_s = 1.0;
  std::uint64_t first_index = 0;
  Provenance meta;

  std::size_t size() const noexcept { return values.size(); }
  double time_of(std::size_t i) const {
    return static_cast<double>(first_index + i) / sample_rate;
  }
};

struct DetectionReport {
  double threshold = 0.0;
  std::vector<std::uint8_t> decisions;
  double detection_rate = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr), both nondecreasing
  double auc = 0.0;
};

// Column-stacked h(t): subcarrier-major, column-major per antenna matrix.
std::vector<cdouble> vectorize(const CsiFrame& frame);

// |h_n(t)| for a frame sequence, stored frame-major:
// at(t, k, ch) with ch = tx * n_rx + rx.
class MagnitudeTrace {
 public:
  MagnitudeTrace() = default;
  MagnitudeTrace(int n_subcarriers, int n_channels) : n_sc_(n_subcarriers), n_ch_(n_channels) {}

  static MagnitudeTrace from_frames(std::span<const CsiFrame> frames);

  void append(const CsiFrame& frame);
  std::size_t frames() const noexcept {
    return n_sc_ * n_ch_ == 0 ? 0 : data_.size() / static_cast<std::size_t>(n_sc_ * n_ch_);
  }
  int subcarriers() const noexcept { return n_sc_; }
  int channels() const noexcept { return n_ch_; }
  double at(std::size_t t, int k, int ch) const {
    return data_[(t * static_cast<std::size_t>(n_sc_) + static_cast<std::size_t>(k)) * n_ch_ + ch];
  }

 private:
  int n_sc_ = 0;
  int n_ch_ = 0;
  std::vector<double> data_;
};

// Scores every subcarrier by its mean Pearson correlation (magnitudes, averaged
// over spatial channels) with all other subcarriers and keeps the k best,
// lower index first on ties. Returned indices are ascending.
std::vector<int> select_subcarriers(const MagnitudeTrace& reference, int k);
std::vector<int> select_subcarriers(std::span<const CsiFrame> reference, int k);

// Keeps only the listed subcarriers of a frame, in the listed order.
CsiFrame restrict_subcarriers(const CsiFrame& frame, std::span<const int> subcarriers);

// Trailing-window population standard deviation; output[i] covers
// series[i .. i + window - 1].
std::vector<double> sliding_std(std::span<const double> series, std::size_t window);

std::size_t window_samples(double window_s, double sample_rate);

ObservationSeries observe(std::span<const CsiFrame> frames, double sample_rate, double window_s);
// Same, over the selected subcarriers of a magnitude trace. first_index is the
// t_index of the trace's first frame.
ObservationSeries observe(const MagnitudeTrace& trace, std::span<const int> subcarriers,
                          double sample_rate, double window_s, std::uint64_t first_index = 0);

// Plain statistics over a sample (median of an even count averages the middle pair).
double median(std::span<const double> x);
double median_absolute_deviation(std::span<const double> x);
// Linear interpolation between closest ranks; q in [0, 1].
double percentile(std::span<const double> x, double q);

inline constexpr double kDefaultConservativeness = 11.0;

// u = median + C * MAD (unscaled MAD).
double calibrate_threshold(std::span<const double> reference, double c = kDefaultConservativeness);
// u = max(reference): the lowest threshold with zero false positives on it.
double max_threshold(std::span<const double> reference);

// decisions[i] = obs[i] > u.
DetectionReport detect(std::span<const double> obs, double threshold);

// Threshold sweep over all observed values plus +-infinity.
DetectionReport roc(std::span<const double> motion, std::span<const double> reference);

// detect() on the motion series plus FPR on the reference and the ROC/AUC.
DetectionReport evaluate(std::span<const double> motion, std::span<const double> reference,
                         double threshold);

}  // namespace irshield
