// SPDX-License-Identifier: Apache-2.0
#include "tilesr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tilesr {
namespace {

inline int clampi(int i, int lo, int hi) { return i < lo ? lo : (i > hi ? hi : i); }

std::vector<double> plane(const Image& a, int ch) {
  std::vector<double> p(static_cast<std::size_t>(a.h) * a.w);
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) p[static_cast<std::size_t>(y) * a.w + x] = a.at(y, x, ch);
  return p;
}

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("metric operands must share dimensions");
}

}  // namespace

const char* metric_name(MetricId id) {
  switch (id) {
    case MetricId::Psnr: return "psnr";
    case MetricId::Ssim: return "ssim";
    case MetricId::Nlpd: return "nlpd";
    case MetricId::NrNaturalness: return "nr_naturalness";
    case MetricId::NrDetail: return "nr_detail";
  }
  return "?";
}

std::optional<MetricId> metric_from_name(const std::string& name) {
  if (name == "psnr") return MetricId::Psnr;
  if (name == "ssim") return MetricId::Ssim;
  if (name == "nlpd") return MetricId::Nlpd;
  if (name == "nr_naturalness") return MetricId::NrNaturalness;
  if (name == "nr_detail") return MetricId::NrDetail;
  return std::nullopt;
}

std::vector<MetricSpec> default_metric_specs() {
  return {
      {MetricId::Psnr, false, false, 1.0, 10.0, 50.0},
      {MetricId::Ssim, false, false, 1.0, 0.0, 1.0},
      {MetricId::Nlpd, false, true, 1.0, 0.0, 1.0},
      {MetricId::NrNaturalness, true, false, 1.0, 0.0, 1.0},
      {MetricId::NrDetail, true, false, 1.0, 0.0, 1.0},
  };
}

double psnr(const Image& a, const Image& b, double peak) {
  require_same_shape(a, b);
  if (!(peak > 0.0)) throw std::invalid_argument("peak must be positive");
  double s = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    double d = a.v[i] - b.v[i];
    s += d * d;
  }
  double mse = s / a.v.size();
  if (mse == 0.0) return 100.0;
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b);
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  if (a.h < kWin || a.w < kWin) throw std::invalid_argument("ssim needs tiles of at least 11x11");
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;  // dynamic range 1.0
  // normalized 2-D Gaussian window
  double win[kWin][kWin];
  double sum = 0;
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) {
      double di = i - (kWin - 1) / 2.0, dj = j - (kWin - 1) / 2.0;
      win[i][j] = std::exp(-(di * di + dj * dj) / (2 * kSigma * kSigma));
      sum += win[i][j];
    }
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) win[i][j] /= sum;

  double total = 0;
  for (int ch = 0; ch < a.c; ++ch) {
    std::vector<double> pa = plane(a, ch), pb = plane(b, ch);
    double acc = 0;
    int count = 0;
    for (int y0 = 0; y0 + kWin <= a.h; ++y0)
      for (int x0 = 0; x0 + kWin <= a.w; ++x0) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int i = 0; i < kWin; ++i)
          for (int j = 0; j < kWin; ++j) {
            double wgt = win[i][j];
            double va = pa[static_cast<std::size_t>(y0 + i) * a.w + x0 + j];
            double vb = pb[static_cast<std::size_t>(y0 + i) * a.w + x0 + j];
            ma += wgt * va;
            mb += wgt * vb;
            maa += wgt * va * va;
            mbb += wgt * vb * vb;
            mab += wgt * va * vb;
          }
        double va = std::max(maa - ma * ma, 0.0);
        double vb = std::max(mbb - mb * mb, 0.0);
        double cov = mab - ma * mb;
        acc += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
        ++count;
      }
    total += acc / count;
  }
  return total / a.c;
}

namespace {

// 5-tap binomial low-pass, replicate borders, separable
std::vector<double> blur5(const std::vector<double>& p, int h, int w) {
  static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  std::vector<double> tmp(p.size()), out(p.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int t = -2; t <= 2; ++t)
        s += k[t + 2] * p[static_cast<std::size_t>(y) * w + clampi(x + t, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int t = -2; t <= 2; ++t)
        s += k[t + 2] * tmp[static_cast<std::size_t>(clampi(y + t, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

// Divisively normalized high-pass bands of an L-level Laplacian pyramid; the
// low-pass residual is not a band. Downsampling keeps even indices, the
// expansion duplicates pixels.
std::vector<std::vector<double>> norm_bands(std::vector<double> g, int h, int w, int levels) {
  constexpr double kC0 = 0.1;
  std::vector<std::vector<double>> out;
  for (int l = 0; l < levels; ++l) {
    std::vector<double> lo = blur5(g, h, w);
    int nh = (h + 1) / 2, nw = (w + 1) / 2;
    std::vector<double> down(static_cast<std::size_t>(nh) * nw);
    for (int y = 0; y < nh; ++y)
      for (int x = 0; x < nw; ++x)
        down[static_cast<std::size_t>(y) * nw + x] = lo[static_cast<std::size_t>(2 * y) * w + 2 * x];
    std::vector<double> band(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        band[static_cast<std::size_t>(y) * w + x] =
            g[static_cast<std::size_t>(y) * w + x] - down[static_cast<std::size_t>(y / 2) * nw + x / 2];
    std::vector<double> norm(band.size());
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double act = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            act += std::fabs(band[static_cast<std::size_t>(clampi(y + dy, 0, h - 1)) * w +
                                  clampi(x + dx, 0, w - 1)]);
        norm[static_cast<std::size_t>(y) * w + x] =
            band[static_cast<std::size_t>(y) * w + x] / (act / 9.0 + kC0);
      }
    out.push_back(std::move(norm));
    g = std::move(down);
    h = nh;
    w = nw;
  }
  return out;
}

int auto_levels(int h, int w) {
  int ms = std::min(h, w);
  int fl = 0;
  while ((2 << fl) <= ms) ++fl;  // floor(log2(ms))
  return std::min(4, fl - 2);
}

}  // namespace

double nlpd_levels(const Image& a, const Image& b, int levels) {
  require_same_shape(a, b);
  if (levels < 1) throw std::invalid_argument("nlpd needs at least one pyramid level");
  if (std::min(a.h, a.w) < (1 << levels))
    throw std::invalid_argument("tile too small for requested pyramid depth");
  double total = 0;
  for (int ch = 0; ch < a.c; ++ch) {
    auto ba = norm_bands(plane(a, ch), a.h, a.w, levels);
    auto bb = norm_bands(plane(b, ch), a.h, a.w, levels);
    double acc = 0;
    for (int l = 0; l < levels; ++l) {
      double s = 0;
      for (std::size_t i = 0; i < ba[l].size(); ++i) {
        double d = ba[l][i] - bb[l][i];
        s += d * d;
      }
      acc += std::sqrt(s / ba[l].size());
    }
    total += acc / levels;
  }
  return total / a.c;
}

double nlpd(const Image& a, const Image& b) {
  require_same_shape(a, b);
  int levels = auto_levels(a.h, a.w);
  if (levels < 1) throw std::invalid_argument("tile too small for nlpd (min side below 8)");
  return nlpd_levels(a, b, levels);
}

namespace {

// E|x|^2 / E[x^2] of a generalized Gaussian as a function of its shape;
// strictly increasing on the clamp range
double ggd_ratio(double shape) {
  return std::exp(2.0 * std::lgamma(2.0 / shape) - std::lgamma(1.0 / shape) -
                  std::lgamma(3.0 / shape));
}

double ggd_shape_from_ratio(double r) {
  double lo = 0.2, hi = 10.0;
  if (r <= ggd_ratio(lo)) return lo;
  if (r >= ggd_ratio(hi)) return hi;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ggd_ratio(mid) < r)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double nr_naturalness(const Image& a) {
  if (std::min(a.h, a.w) < 16) throw std::invalid_argument("nr_naturalness needs min side >= 16");
  constexpr double kC = 1e-3;
  double total = 0;
  for (int ch = 0; ch < a.c; ++ch) {
    std::vector<double> p = plane(a, ch);
    double m1 = 0, m2 = 0;
    // MSCN over a 7x7 box window, replicate borders
    for (int y = 0; y < a.h; ++y)
      for (int x = 0; x < a.w; ++x) {
        double s = 0, s2 = 0;
        for (int dy = -3; dy <= 3; ++dy)
          for (int dx = -3; dx <= 3; ++dx) {
            double v = p[static_cast<std::size_t>(clampi(y + dy, 0, a.h - 1)) * a.w +
                         clampi(x + dx, 0, a.w - 1)];
            s += v;
            s2 += v * v;
          }
        double mu = s / 49.0;
        double var = std::max(s2 / 49.0 - mu * mu, 0.0);
        double m = (p[static_cast<std::size_t>(y) * a.w + x] - mu) / (std::sqrt(var) + kC);
        m1 += std::fabs(m);
        m2 += m * m;
      }
    std::size_t n = p.size();
    m1 /= n;
    m2 /= n;
    if (m2 <= 1e-24) continue;  // constant tile: score 0
    double shape = ggd_shape_from_ratio(m1 * m1 / m2);
    total += std::exp(-std::fabs(shape - 2.0));
  }
  return total / a.c;
}

double nr_detail(const Image& a) {
  if (std::min(a.h, a.w) < 16) throw std::invalid_argument("nr_detail needs min side >= 16");
  double total = 0;
  for (int ch = 0; ch < a.c; ++ch) {
    std::vector<double> p = plane(a, ch);
    int bh = a.h / 8, bw = a.w / 8;
    int hist[32] = {0};
    int blocks = 0;
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        double s = 0, s2 = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            double v = p[static_cast<std::size_t>(by * 8 + y) * a.w + bx * 8 + x];
            s += v;
            s2 += v * v;
          }
        double mu = s / 64.0;
        double sd = std::sqrt(std::max(s2 / 64.0 - mu * mu, 0.0));
        int bin = std::min(31, static_cast<int>(sd / 0.5 * 32.0));
        ++hist[bin];
        ++blocks;
      }
    double ent = 0;
    for (int k = 0; k < 32; ++k)
      if (hist[k] > 0) {
        double q = static_cast<double>(hist[k]) / blocks;
        ent -= q * std::log(q);
      }
    total += ent / std::log(32.0);
  }
  return total / a.c;
}

double normalize_metric(double raw, const MetricSpec& spec) {
  if (!(spec.norm_lo < spec.norm_hi)) throw std::invalid_argument("normalization window is empty");
  double v = (raw - spec.norm_lo) / (spec.norm_hi - spec.norm_lo);
  v = std::clamp(v, 0.0, 1.0);
  return spec.lower_better ? 1.0 - v : v;
}

RepresentationScore representation_score(const Image& f, const Image& o,
                                         const std::vector<MetricSpec>& specs, bool nr_active,
                                         int timestep) {
  require_same_shape(f, o);
  double w_all = 0, w_fr = 0, w_nr = 0;
  double s_all = 0, s_fr = 0, s_nr = 0;
  bool any_fr = false, any_nr = false;
  for (const MetricSpec& spec : specs) {
    if (spec.weight <= 0.0) continue;
    if (spec.no_reference && !nr_active) continue;
    double raw;
    switch (spec.id) {
      case MetricId::Psnr: raw = psnr(f, o, kLatentPeak); break;
      case MetricId::Ssim: raw = ssim(f, o); break;
      case MetricId::Nlpd: raw = nlpd(f, o); break;
      case MetricId::NrNaturalness: raw = nr_naturalness(f); break;
      case MetricId::NrDetail: raw = nr_detail(f); break;
      default: throw std::invalid_argument("unknown metric id");
    }
    double n = normalize_metric(raw, spec);
    s_all += spec.weight * n;
    w_all += spec.weight;
    if (spec.no_reference) {
      s_nr += spec.weight * n;
      w_nr += spec.weight;
      any_nr = true;
    } else {
      s_fr += spec.weight * n;
      w_fr += spec.weight;
      any_fr = true;
    }
  }
  if (w_all <= 0.0) throw std::invalid_argument("no active metrics");
  if (!any_fr) throw std::invalid_argument("metric set must contain a full-reference member");
  RepresentationScore r;
  r.value = s_all / w_all;
  r.fr_component = s_fr / w_fr;
  if (any_nr) r.nr_component = s_nr / w_nr;
  r.timestep = timestep;
  return r;
}

InfoGainReport info_gain(const RepresentationScore& current, const RepresentationScore& previous) {
  if (!(previous.timestep > current.timestep))
    throw std::invalid_argument("info gain requires strictly decreasing timesteps");
  InfoGainReport g;
  g.gain = std::tanh(current.value - previous.value);
  g.fr_gain = std::tanh(current.fr_component - previous.fr_component);
  if (current.nr_component && previous.nr_component)
    g.nr_gain = std::tanh(*current.nr_component - *previous.nr_component);
  g.timestep_from = previous.timestep;
  g.timestep_to = current.timestep;
  return g;
}

}  // namespace tilesr
