// SPDX-License-Identifier: Apache-2.0

#include "irshield/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "irshield/errors.hpp"

namespace irshield {

std::vector<cdouble> vectorize(const CsiFrame& frame) { return frame.values; }

MagnitudeTrace MagnitudeTrace::from_frames(std::span<const CsiFrame> frames) {
  if (frames.empty()) return {};
  MagnitudeTrace trace(frames.front().n_subcarriers, static_cast<int>(frames.front().spatial_channels()));
  for (const auto& f : frames) trace.append(f);
  return trace;
}

void MagnitudeTrace::append(const CsiFrame& frame) {
  if (frame.n_subcarriers != n_sc_ || static_cast<int>(frame.spatial_channels()) != n_ch_ ||
      frame.values.size() != static_cast<std::size_t>(n_sc_ * n_ch_))
    throw ContractViolation("MagnitudeTrace: frame shape differs from the trace");
  for (const auto& v : frame.values) data_.push_back(std::abs(v));
}

std::vector<int> select_subcarriers(const MagnitudeTrace& reference, int k) {
  const int n_sc = reference.subcarriers();
  const std::size_t n_t = reference.frames();
  if (n_t < 2) throw ContractViolation("select_subcarriers: need at least two reference frames");
  if (k < 1 || k > n_sc)
    throw ContractViolation("select_subcarriers: cannot select " + std::to_string(k) + " of " +
                            std::to_string(n_sc) + " subcarriers");

  // corr_sum[i * n_sc + j] accumulates the per-channel correlation coefficient.
  std::vector<double> corr_sum(static_cast<std::size_t>(n_sc) * n_sc, 0.0);
  std::vector<double> z(static_cast<std::size_t>(n_sc) * n_t);
  std::vector<char> varies(static_cast<std::size_t>(n_sc));
  for (int ch = 0; ch < reference.channels(); ++ch) {
    for (int sc = 0; sc < n_sc; ++sc) {
      double* zs = &z[static_cast<std::size_t>(sc) * n_t];
      const double first = reference.at(0, sc, ch);
      bool constant = true;
      double mean = 0.0;
      for (std::size_t t = 0; t < n_t; ++t) {
        zs[t] = reference.at(t, sc, ch);
        constant = constant && zs[t] == first;
        mean += zs[t];
      }
      mean /= static_cast<double>(n_t);
      double ss = 0.0;
      for (std::size_t t = 0; t < n_t; ++t) {
        zs[t] -= mean;
        ss += zs[t] * zs[t];
      }
      varies[static_cast<std::size_t>(sc)] = !constant && ss > 0.0;
      if (varies[static_cast<std::size_t>(sc)]) {
        const double inv = 1.0 / std::sqrt(ss);
        for (std::size_t t = 0; t < n_t; ++t) zs[t] *= inv;
      }
    }
    for (int i = 0; i < n_sc; ++i) {
      if (!varies[static_cast<std::size_t>(i)]) continue;
      const double* zi = &z[static_cast<std::size_t>(i) * n_t];
      for (int j = i + 1; j < n_sc; ++j) {
        if (!varies[static_cast<std::size_t>(j)]) continue;
        const double* zj = &z[static_cast<std::size_t>(j) * n_t];
        double c = 0.0;
        for (std::size_t t = 0; t < n_t; ++t) c += zi[t] * zj[t];
        corr_sum[static_cast<std::size_t>(i) * n_sc + j] += c;
        corr_sum[static_cast<std::size_t>(j) * n_sc + i] += c;
      }
    }
  }

  std::vector<double> score(static_cast<std::size_t>(n_sc), 0.0);
  if (n_sc > 1) {
    const double norm = static_cast<double>(reference.channels()) * (n_sc - 1);
    for (int i = 0; i < n_sc; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_sc; ++j) {
        if (j != i) s += corr_sum[static_cast<std::size_t>(i) * n_sc + j];
      }
      score[static_cast<std::size_t>(i)] = s / norm;
    }
  }
  std::vector<int> order(static_cast<std::size_t>(n_sc));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<int> select_subcarriers(std::span<const CsiFrame> reference, int k) {
  return select_subcarriers(MagnitudeTrace::from_frames(reference), k);
}

CsiFrame restrict_subcarriers(const CsiFrame& frame, std::span<const int> subcarriers) {
  CsiFrame out;
  out.t_index = frame.t_index;
  out.n_subcarriers = static_cast<int>(subcarriers.size());
  out.n_rx = frame.n_rx;
  out.n_tx = frame.n_tx;
  const std::size_t n_ch = frame.spatial_channels();
  out.values.reserve(subcarriers.size() * n_ch);
  for (int k : subcarriers) {
    if (k < 0 || k >= frame.n_subcarriers) throw ContractViolation("restrict_subcarriers: index out of range");
    const auto begin = frame.values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * n_ch);
    out.values.insert(out.values.end(), begin, begin + static_cast<std::ptrdiff_t>(n_ch));
  }
  return out;
}

std::vector<double> sliding_std(std::span<const double> series, std::size_t window) {
  if (window < 2) throw ContractViolation("sliding_std: window must hold at least two samples");
  if (series.size() < window)
    throw ContractViolation("sliding_std: series of " + std::to_string(series.size()) +
                            " samples is shorter than the window of " + std::to_string(window));
  const std::size_t n_out = series.size() - window + 1;
  const double inv_n = 1.0 / static_cast<double>(window);
  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double* w = series.data() + i;
    const double first = w[0];
    bool constant = true;
    double sum = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
      sum += w[j];
      constant = constant && w[j] == first;
    }
    if (constant) {
      out[i] = 0.0;
      continue;
    }
    const double mean = sum * inv_n;
    double ss = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
      const double d = w[j] - mean;
      ss += d * d;
    }
    out[i] = std::sqrt(ss * inv_n);
  }
  return out;
}

std::size_t window_samples(double window_s, double sample_rate) {
  const double n = std::round(window_s * sample_rate);
  if (!(n >= 2.0)) throw ContractViolation("window must span at least two samples");
  return static_cast<std::size_t>(n);
}

ObservationSeries observe(const MagnitudeTrace& trace, std::span<const int> subcarriers,
                          double sample_rate, double window_s, std::uint64_t first_index) {
  const std::size_t n_w = window_samples(window_s, sample_rate);
  const std::size_t n_t = trace.frames();
  if (n_t < n_w)
    throw ContractViolation("observe: " + std::to_string(n_t) + " frames are fewer than the " +
                            std::to_string(n_w) + "-sample window");
  if (subcarriers.empty()) throw ContractViolation("observe: no subcarriers selected");

  ObservationSeries obs;
  obs.sample_rate = sample_rate;
  obs.window_s = window_s;
  obs.first_index = first_index + n_w - 1;
  obs.values.assign(n_t - n_w + 1, 0.0);
  std::vector<double> series(n_t);
  for (int k : subcarriers) {
    if (k < 0 || k >= trace.subcarriers()) throw ContractViolation("observe: subcarrier out of range");
    for (int ch = 0; ch < trace.channels(); ++ch) {
      for (std::size_t t = 0; t < n_t; ++t) series[t] = trace.at(t, k, ch);
      const auto s = sliding_std(series, n_w);
      for (std::size_t i = 0; i < s.size(); ++i) obs.values[i] += s[i];
    }
  }
  const double n_components = static_cast<double>(subcarriers.size()) * trace.channels();
  for (auto& v : obs.values) v /= n_components;
  return obs;
}

ObservationSeries observe(std::span<const CsiFrame> frames, double sample_rate, double window_s) {
  if (frames.empty()) throw ContractViolation("observe: no frames");
  for (const auto& f : frames) {
    if (!f.shape_equals(frames.front())) throw ContractViolation("observe: frames differ in shape");
  }
  const auto trace = MagnitudeTrace::from_frames(frames);
  std::vector<int> all(static_cast<std::size_t>(trace.subcarriers()));
  std::iota(all.begin(), all.end(), 0);
  return observe(trace, all, sample_rate, window_s, frames.front().t_index);
}

double median(std::span<const double> x) {
  if (x.empty()) throw ContractViolation("median of an empty sample");
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median_absolute_deviation(std::span<const double> x) {
  const double m = median(x);
  std::vector<double> dev(x.size());
  std::transform(x.begin(), x.end(), dev.begin(), [m](double v) { return std::abs(v - m); });
  return median(dev);
}

double percentile(std::span<const double> x, double q) {
  if (x.empty()) throw ContractViolation("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractViolation("percentile: q outside [0, 1]");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

double calibrate_threshold(std::span<const double> reference, double c) {
  if (reference.empty()) throw ContractViolation("calibrate_threshold: empty reference");
  return median(reference) + c * median_absolute_deviation(reference);
}

double max_threshold(std::span<const double> reference) {
  if (reference.empty()) throw ContractViolation("max_threshold: empty reference");
  return *std::max_element(reference.begin(), reference.end());
}

DetectionReport detect(std::span<const double> obs, double threshold) {
  if (obs.empty()) throw ContractViolation("detect: empty observation");
  DetectionReport r;
  r.threshold = threshold;
  r.decisions.reserve(obs.size());
  std::size_t hits = 0;
  for (double v : obs) {
    const bool d = v > threshold;
    r.decisions.push_back(d);
    hits += d;
  }
  r.detection_rate = static_cast<double>(hits) / static_cast<double>(obs.size());
  r.tpr = r.detection_rate;
  return r;
}

namespace {

// Fraction of sorted values strictly above u.
double fraction_above(const std::vector<double>& sorted, double u) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), u);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

}  // namespace

DetectionReport roc(std::span<const double> motion, std::span<const double> reference) {
  if (motion.empty() || reference.empty()) throw ContractViolation("roc: empty observation");
  std::vector<double> m(motion.begin(), motion.end());
  std::vector<double> r(reference.begin(), reference.end());
  std::sort(m.begin(), m.end());
  std::sort(r.begin(), r.end());
  std::vector<double> thresholds;
  thresholds.reserve(m.size() + r.size());
  std::merge(m.begin(), m.end(), r.begin(), r.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  DetectionReport rep;
  auto push = [&](double fpr, double tpr) {
    if (rep.roc_points.empty() || rep.roc_points.back() != std::pair{fpr, tpr})
      rep.roc_points.emplace_back(fpr, tpr);
  };
  push(0.0, 0.0);
  for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
    push(fraction_above(r, *it), fraction_above(m, *it));
  }
  push(1.0, 1.0);

  double auc = 0.0;
  for (std::size_t i = 1; i < rep.roc_points.size(); ++i) {
    const auto [x0, y0] = rep.roc_points[i - 1];
    const auto [x1, y1] = rep.roc_points[i];
    auc += (x1 - x0) * 0.5 * (y0 + y1);
  }
  rep.auc = std::clamp(auc, 0.0, 1.0);
  return rep;
}

DetectionReport evaluate(std::span<const double> motion, std::span<const double> reference,
                         double threshold) {
  DetectionReport rep = roc(motion, reference);
  const DetectionReport d = detect(motion, threshold);
  rep.threshold = threshold;
  rep.decisions = d.decisions;
  rep.detection_rate = d.detection_rate;
  rep.tpr = d.detection_rate;
  std::size_t false_pos = 0;
  for (double v : reference) false_pos += v > threshold;
  rep.fpr = static_cast<double>(false_pos) / static_cast<double>(reference.size());
  return rep;
}

}  // namespace irshield
