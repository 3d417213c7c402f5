// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace oracle {
namespace {

int clampi(int i, int lo, int hi) { return i < lo ? lo : (i > hi ? hi : i); }

// plane extraction: one channel as a dense h x w buffer
std::vector<double> plane(const double* a, int h, int w, int c, int ch) {
  std::vector<double> p(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      p[static_cast<size_t>(y) * w + x] = a[(static_cast<size_t>(y) * w + x) * c + ch];
  return p;
}

}  // namespace

double mse(const double* a, const double* b, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s / n;
}

double psnr(const double* a, const double* b, int h, int w, int c, double peak) {
  double m = mse(a, b, h * w * c);
  if (m == 0.0) return 100.0;
  return 10.0 * std::log10(peak * peak / m);
}

double ssim(const double* a, const double* b, int h, int w, int c) {
  const int win = 11;
  const double sigma = 1.5;
  // 1-D normalized Gaussian, then outer product
  double g1[win];
  double s1 = 0;
  for (int i = 0; i < win; ++i) {
    double d = i - (win - 1) / 2.0;
    g1[i] = std::exp(-d * d / (2 * sigma * sigma));
    s1 += g1[i];
  }
  for (int i = 0; i < win; ++i) g1[i] /= s1;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double total = 0;
  for (int ch = 0; ch < c; ++ch) {
    std::vector<double> pa = plane(a, h, w, c, ch), pb = plane(b, h, w, c, ch);
    double acc = 0;
    int nwin = 0;
    for (int y0 = 0; y0 + win <= h; ++y0) {
      for (int x0 = 0; x0 + win <= w; ++x0) {
        double mu_a = 0, mu_b = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            double wgt = g1[i] * g1[j];
            mu_a += wgt * pa[static_cast<size_t>(y0 + i) * w + x0 + j];
            mu_b += wgt * pb[static_cast<size_t>(y0 + i) * w + x0 + j];
          }
        double va = 0, vb = 0, cov = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            double wgt = g1[i] * g1[j];
            double da = pa[static_cast<size_t>(y0 + i) * w + x0 + j] - mu_a;
            double db = pb[static_cast<size_t>(y0 + i) * w + x0 + j] - mu_b;
            va += wgt * da * da;
            vb += wgt * db * db;
            cov += wgt * da * db;
          }
        acc += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
        ++nwin;
      }
    }
    total += acc / nwin;
  }
  return total / c;
}

namespace {

// 5-tap binomial blur, replicate borders, both axes
std::vector<double> blur5(const std::vector<double>& p, int h, int w) {
  static const double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  std::vector<double> tmp(p.size()), out(p.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int t = -2; t <= 2; ++t) s += k[t + 2] * p[static_cast<size_t>(y) * w + clampi(x + t, 0, w - 1)];
      tmp[static_cast<size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int t = -2; t <= 2; ++t) s += k[t + 2] * tmp[static_cast<size_t>(clampi(y + t, 0, h - 1)) * w + x];
      out[static_cast<size_t>(y) * w + x] = s;
    }
  return out;
}

// high-pass band sequence of the Laplacian pyramid; the low-pass residual is
// not a level
void bands(const std::vector<double>& p0, int h, int w, int levels,
           std::vector<std::vector<double>>& out, std::vector<std::pair<int, int>>& dims) {
  std::vector<double> g = p0;
  int gh = h, gw = w;
  for (int l = 0; l < levels; ++l) {
    std::vector<double> lo = blur5(g, gh, gw);
    int nh = (gh + 1) / 2, nw = (gw + 1) / 2;
    std::vector<double> down(static_cast<size_t>(nh) * nw);
    for (int y = 0; y < nh; ++y)
      for (int x = 0; x < nw; ++x)
        down[static_cast<size_t>(y) * nw + x] = lo[static_cast<size_t>(2 * y) * gw + 2 * x];
    std::vector<double> band(static_cast<size_t>(gh) * gw);
    for (int y = 0; y < gh; ++y)
      for (int x = 0; x < gw; ++x)
        band[static_cast<size_t>(y) * gw + x] =
            g[static_cast<size_t>(y) * gw + x] - down[static_cast<size_t>(y / 2) * nw + x / 2];
    // divisive normalization by 3x3 mean absolute activity + 0.1
    std::vector<double> norm(band.size());
    for (int y = 0; y < gh; ++y)
      for (int x = 0; x < gw; ++x) {
        double act = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            act += std::fabs(band[static_cast<size_t>(clampi(y + dy, 0, gh - 1)) * gw + clampi(x + dx, 0, gw - 1)]);
        act /= 9.0;
        norm[static_cast<size_t>(y) * gw + x] = band[static_cast<size_t>(y) * gw + x] / (act + 0.1);
      }
    out.push_back(std::move(norm));
    dims.emplace_back(gh, gw);
    g = std::move(down);
    gh = nh;
    gw = nw;
  }
}

}  // namespace

int nlpd_auto_levels(int h, int w) {
  int ms = std::min(h, w);
  int l = 0;
  while ((2 << l) <= ms) ++l;  // l = floor(log2(ms))
  return std::min(4, l - 2);
}

double nlpd(const double* a, const double* b, int h, int w, int c, int levels) {
  double total = 0;
  for (int ch = 0; ch < c; ++ch) {
    std::vector<std::vector<double>> ba, bb;
    std::vector<std::pair<int, int>> da, db;
    bands(plane(a, h, w, c, ch), h, w, levels, ba, da);
    bands(plane(b, h, w, c, ch), h, w, levels, bb, db);
    double acc = 0;
    for (int l = 0; l < levels; ++l) {
      double s = 0;
      for (size_t i = 0; i < ba[l].size(); ++i) {
        double d = ba[l][i] - bb[l][i];
        s += d * d;
      }
      acc += std::sqrt(s / ba[l].size());
    }
    total += acc / levels;
  }
  return total / c;
}

namespace {

// E|x|^2 / E[x^2] for a generalized Gaussian with shape g
double ggd_ratio(double g) {
  double a = std::lgamma(2.0 / g), b = std::lgamma(1.0 / g), d = std::lgamma(3.0 / g);
  return std::exp(2 * a - b - d);
}

}  // namespace

double naturalness(const double* a, int h, int w, int c) {
  double total = 0;
  for (int ch = 0; ch < c; ++ch) {
    std::vector<double> p = plane(a, h, w, c, ch);
    // MSCN with a 7x7 box window, replicate borders
    std::vector<double> m(p.size());
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double mu = 0;
        for (int dy = -3; dy <= 3; ++dy)
          for (int dx = -3; dx <= 3; ++dx)
            mu += p[static_cast<size_t>(clampi(y + dy, 0, h - 1)) * w + clampi(x + dx, 0, w - 1)];
        mu /= 49.0;
        double var = 0;
        for (int dy = -3; dy <= 3; ++dy)
          for (int dx = -3; dx <= 3; ++dx) {
            double d = p[static_cast<size_t>(clampi(y + dy, 0, h - 1)) * w + clampi(x + dx, 0, w - 1)] - mu;
            var += d * d;
          }
        var /= 49.0;
        m[static_cast<size_t>(y) * w + x] = (p[static_cast<size_t>(y) * w + x] - mu) / (std::sqrt(var) + 1e-3);
      }
    double m1 = 0, m2 = 0;
    for (double v : m) {
      m1 += std::fabs(v);
      m2 += v * v;
    }
    m1 /= m.size();
    m2 /= m.size();
    if (m2 <= 1e-24) continue;  // zero-variance convention: score 0
    double r = m1 * m1 / m2;
    double lo = 0.2, hi = 10.0, shape;
    if (r <= ggd_ratio(lo)) {
      shape = lo;
    } else if (r >= ggd_ratio(hi)) {
      shape = hi;
    } else {
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (ggd_ratio(mid) < r)
          lo = mid;
        else
          hi = mid;
      }
      shape = 0.5 * (lo + hi);
    }
    total += std::exp(-std::fabs(shape - 2.0));
  }
  return total / c;
}

double detail(const double* a, int h, int w, int c) {
  double total = 0;
  for (int ch = 0; ch < c; ++ch) {
    std::vector<double> p = plane(a, h, w, c, ch);
    int bh = h / 8, bw = w / 8;
    std::vector<int> hist(32, 0);
    int nblocks = 0;
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        double mu = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) mu += p[static_cast<size_t>(by * 8 + y) * w + bx * 8 + x];
        mu /= 64.0;
        double var = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            double d = p[static_cast<size_t>(by * 8 + y) * w + bx * 8 + x] - mu;
            var += d * d;
          }
        double sd = std::sqrt(var / 64.0);
        int bin = static_cast<int>(sd / 0.5 * 32.0);
        if (bin > 31) bin = 31;
        ++hist[bin];
        ++nblocks;
      }
    double ent = 0;
    for (int k = 0; k < 32; ++k)
      if (hist[k] > 0) {
        double q = static_cast<double>(hist[k]) / nblocks;
        ent -= q * std::log(q);
      }
    total += ent / std::log(32.0);
  }
  return total / c;
}

std::vector<double> gauss_map(int size, double sigma) {
  std::vector<double> out(static_cast<size_t>(size) * size);
  double center = (size - 1) / 2.0;
  double dmin = (size % 2 == 1) ? 0.0 : 0.5;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double dy = y - center, dx = x - center;
      double wy = std::exp(-(dy * dy - dmin * dmin) / (2 * sigma * sigma));
      double wx = std::exp(-(dx * dx - dmin * dmin) / (2 * sigma * sigma));
      out[static_cast<size_t>(y) * size + x] = wy * wx;
    }
  return out;
}

}  // namespace oracle
