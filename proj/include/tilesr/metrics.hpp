// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tilesr/image.hpp"

namespace tilesr {

enum class MetricId { Psnr, Ssim, Nlpd, NrNaturalness, NrDetail };

const char* metric_name(MetricId id);
std::optional<MetricId> metric_from_name(const std::string& name);

// Normalization window and aggregation weight for one metric. NR metrics
// score the candidate tile alone; FR metrics compare against the reference.
struct MetricSpec {
  MetricId id = MetricId::Psnr;
  bool no_reference = false;
  bool lower_better = false;
  double weight = 1.0;
  double norm_lo = 0.0;
  double norm_hi = 1.0;
};

// psnr [10,50] dB, ssim [0,1], nlpd [0,1] lower-better, NR proxies native
// [0,1]; uniform weights
std::vector<MetricSpec> default_metric_specs();

double psnr(const Image& a, const Image& b, double peak);
double ssim(const Image& a, const Image& b);
double nlpd(const Image& a, const Image& b);
// explicit level count; nlpd() picks min(4, floor(log2(min side)) - 2)
double nlpd_levels(const Image& a, const Image& b, int levels);
double nr_naturalness(const Image& a);
double nr_detail(const Image& a);

double normalize_metric(double raw, const MetricSpec& spec);

// Latents live in [-1, 1]; psnr inside representation_score uses this peak.
inline constexpr double kLatentPeak = 2.0;

struct RepresentationScore {
  double value = 0;
  double fr_component = 0;
  std::optional<double> nr_component;
  int timestep = 0;
};

struct InfoGainReport {
  double gain = 0;
  double fr_gain = 0;
  std::optional<double> nr_gain;
  int timestep_from = 0, timestep_to = 0;
};

// Weighted sum of normalized metric values; NR metrics contribute only when
// nr_active. Weights are renormalized over the active set, and each component
// is renormalized within its own kind.
RepresentationScore representation_score(const Image& f, const Image& o,
                                         const std::vector<MetricSpec>& specs, bool nr_active,
                                         int timestep);

// tanh of the score deltas; nr_gain absent unless both sides carry an NR
// component. Requires previous.timestep > current.timestep.
InfoGainReport info_gain(const RepresentationScore& current, const RepresentationScore& previous);

}  // namespace tilesr
