//------------------------------------------------------------------------------
//
//   Copyright 2026 the fdpo authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "fdpo/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "fdpo/error.hpp"
#include "fdpo/phase_congruency.hpp"
#include "fdpo/rng.hpp"

namespace fdpo {

namespace {

void requireSameShape(GrayImage const &a, GrayImage const &b)
{
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::Shape, "image dimensions differ: " + std::to_string(a.width) + "x" +
                                      std::to_string(a.height) + " vs " +
                                      std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

double histogramEntropyBits(std::vector<double> const &counts, double total)
{
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      double const p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

}  // namespace

GrayImage::GrayImage(int w, int h) : width(w), height(h)
{
  if (w < 1 || h < 1) {
    throw Error(ErrorCode::Shape, "image dimensions must be positive");
  }
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> px) : width(w), height(h),
                                                                   pixels(std::move(px))
{
  if (w < 1 || h < 1 ||
      pixels.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw Error(ErrorCode::Shape, "pixel buffer does not match image dimensions");
  }
}

double entropy1d(GrayImage const &img)
{
  std::vector<double> counts(256, 0.0);
  for (std::uint8_t v : img.pixels) {
    counts[v] += 1.0;
  }
  return histogramEntropyBits(counts, static_cast<double>(img.pixels.size()));
}

double entropy2d(GrayImage const &img, int neighborhood)
{
  if (neighborhood < 3 || neighborhood % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "neighborhood must be an odd integer >= 3");
  }
  if (img.width < neighborhood || img.height < neighborhood) {
    throw Error(ErrorCode::Shape, "image smaller than the neighborhood window");
  }
  int const half = neighborhood / 2;
  std::vector<double> joint(256 * 256, 0.0);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      double sum = 0.0;
      for (int dr = -half; dr <= half; ++dr) {
        for (int dc = -half; dc <= half; ++dc) {
          if (dr == 0 && dc == 0) {
            continue;
          }
          int const rr = std::clamp(r + dr, 0, img.height - 1);
          int const cc = std::clamp(c + dc, 0, img.width - 1);
          sum += img.at(rr, cc);
        }
      }
      auto const count = static_cast<double>(neighborhood) * neighborhood - 1.0;
      auto const j = static_cast<int>(std::llround(sum / count));
      joint[static_cast<std::size_t>(img.at(r, c)) * 256 + static_cast<std::size_t>(j)] += 1.0;
    }
  }
  return histogramEntropyBits(joint, static_cast<double>(img.pixels.size()));
}

double rmse(GrayImage const &a, GrayImage const &b)
{
  requireSameShape(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    double const d = (static_cast<double>(a.pixels[i]) - b.pixels[i]) / 255.0;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.pixels.size()));
}

PsnrResult psnr(GrayImage const &a, GrayImage const &b)
{
  requireSameShape(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    double const d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    acc += d * d;
  }
  double const mse = acc / static_cast<double>(a.pixels.size());
  if (mse == 0.0) {
    return {true, 0.0};
  }
  return {false, 10.0 * std::log10(255.0 * 255.0 / mse)};
}

double ssim(GrayImage const &a, GrayImage const &b)
{
  requireSameShape(a, b);
  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  if (a.width < kWindow || a.height < kWindow) {
    throw Error(ErrorCode::Shape, "ssim needs images of at least 11x11");
  }

  std::array<double, kWindow * kWindow> weights{};
  {
    double total = 0.0;
    for (int r = 0; r < kWindow; ++r) {
      for (int c = 0; c < kWindow; ++c) {
        double const dr = r - (kWindow - 1) / 2.0;
        double const dc = c - (kWindow - 1) / 2.0;
        double const w = std::exp(-(dr * dr + dc * dc) / (2.0 * kSigma * kSigma));
        weights[static_cast<std::size_t>(r * kWindow + c)] = w;
        total += w;
      }
    }
    for (double &w : weights) {
      w /= total;
    }
  }

  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  constexpr double c3 = c2 / 2.0;

  double acc = 0.0;
  int windows = 0;
  for (int r0 = 0; r0 + kWindow <= a.height; ++r0) {
    for (int c0 = 0; c0 + kWindow <= a.width; ++c0) {
      double mu_x = 0.0;
      double mu_y = 0.0;
      double xx = 0.0;
      double yy = 0.0;
      double xy = 0.0;
      for (int r = 0; r < kWindow; ++r) {
        for (int c = 0; c < kWindow; ++c) {
          double const w = weights[static_cast<std::size_t>(r * kWindow + c)];
          double const va = a.at(r0 + r, c0 + c);
          double const vb = b.at(r0 + r, c0 + c);
          mu_x += w * va;
          mu_y += w * vb;
          xx += w * va * va;
          yy += w * vb * vb;
          xy += w * va * vb;
        }
      }
      double const var_x = std::max(xx - mu_x * mu_x, 0.0);
      double const var_y = std::max(yy - mu_y * mu_y, 0.0);
      double const cov = xy - mu_x * mu_y;
      double const sd_x = std::sqrt(var_x);
      double const sd_y = std::sqrt(var_y);
      double const lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1);
      double const con = (2.0 * sd_x * sd_y + c2) / (var_x + var_y + c2);
      double const str = (cov + c3) / (sd_x * sd_y + c3);
      acc += lum * con * str;
      ++windows;
    }
  }
  return acc / windows;
}

namespace {

/// Scharr gradient magnitude, zero padding, same-size output.
std::vector<double> scharrMagnitude(GrayImage const &img)
{
  static constexpr double kx[3][3] = {{3, 0, -3}, {10, 0, -10}, {3, 0, -3}};
  std::vector<double> gm(img.pixels.size());
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      double gx = 0.0;
      double gy = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          int const rr = r + dr;
          int const cc = c + dc;
          if (rr < 0 || rr >= img.height || cc < 0 || cc >= img.width) {
            continue;
          }
          double const v = img.at(rr, cc);
          gx += kx[dr + 1][dc + 1] / 16.0 * v;
          gy += kx[dc + 1][dr + 1] / 16.0 * v;
        }
      }
      gm[static_cast<std::size_t>(r) * img.width + c] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return gm;
}

}  // namespace

double fsim(GrayImage const &a, GrayImage const &b)
{
  requireSameShape(a, b);
  if (a.width < 32 || a.height < 32) {
    throw Error(ErrorCode::Shape, "fsim needs images of at least 32x32");
  }
  constexpr double t1 = 0.85;
  constexpr double t2 = 160.0;

  std::vector<double> img_a(a.pixels.begin(), a.pixels.end());
  std::vector<double> img_b(b.pixels.begin(), b.pixels.end());
  std::vector<double> const pc1 = phaseCongruency(img_a, a.width, a.height);
  std::vector<double> const pc2 = phaseCongruency(img_b, b.width, b.height);
  std::vector<double> const gm1 = scharrMagnitude(a);
  std::vector<double> const gm2 = scharrMagnitude(b);

  double num = 0.0;
  double den = 0.0;
  double sl_sum = 0.0;
  for (std::size_t i = 0; i < pc1.size(); ++i) {
    double const s_pc = (2.0 * pc1[i] * pc2[i] + t1) / (pc1[i] * pc1[i] + pc2[i] * pc2[i] + t1);
    double const s_gm = (2.0 * gm1[i] * gm2[i] + t2) / (gm1[i] * gm1[i] + gm2[i] * gm2[i] + t2);
    double const s_l = s_pc * s_gm;
    double const pc_m = std::max(pc1[i], pc2[i]);
    num += s_l * pc_m;
    den += pc_m;
    sl_sum += s_l;
  }
  if (den < 1e-12) {
    // Structureless pair (both congruency maps vanish): fall back to the
    // unweighted similarity mean.
    return sl_sum / static_cast<double>(pc1.size());
  }
  return num / den;
}

DiversitySummary sampleDiversity(std::span<Sample2D const> samples,
                                 std::span<Sample2D const> mode_centers, double radius)
{
  if (samples.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sample set must be non-empty");
  }
  DiversitySummary out;
  for (auto const &center : mode_centers) {
    for (auto const &s : samples) {
      double const dx = s.x - center.x;
      double const dy = s.y - center.y;
      if (dx * dx + dy * dy <= radius * radius) {
        ++out.mode_coverage;
        break;
      }
    }
  }

  constexpr std::size_t kExactLimit = 2000;
  std::vector<Sample2D> subset;
  std::span<Sample2D const> view = samples;
  if (samples.size() > kExactLimit) {
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(0x5eedu);
    for (std::size_t i = 0; i < kExactLimit; ++i) {
      std::size_t const j = i + rng.below(static_cast<std::uint32_t>(idx.size() - i));
      std::swap(idx[i], idx[j]);
      subset.push_back(samples[idx[i]]);
    }
    view = subset;
  }
  if (view.size() < 2) {
    out.mean_pairwise_distance = 0.0;
    return out;
  }
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    for (std::size_t j = i + 1; j < view.size(); ++j) {
      double const dx = view[i].x - view[j].x;
      double const dy = view[i].y - view[j].y;
      acc += std::sqrt(dx * dx + dy * dy);
      ++pairs;
    }
  }
  out.mean_pairwise_distance = acc / static_cast<double>(pairs);
  return out;
}

GrayImage rasterize(std::span<Sample2D const> samples, int grid, double extent)
{
  if (grid < 16) {
    throw Error(ErrorCode::Config, "raster grid must be at least 16");
  }
  if (!(extent > 0.0)) {
    throw Error(ErrorCode::Config, "raster extent must be positive");
  }
  std::vector<double> counts(static_cast<std::size_t>(grid) * grid, 0.0);
  for (auto const &s : samples) {
    if (s.x < -extent || s.x > extent || s.y < -extent || s.y > extent) {
      continue;
    }
    auto ix = static_cast<int>((s.x + extent) / (2.0 * extent) * grid);
    auto iy = static_cast<int>((s.y + extent) / (2.0 * extent) * grid);
    ix = std::clamp(ix, 0, grid - 1);
    iy = std::clamp(iy, 0, grid - 1);
    counts[static_cast<std::size_t>(iy) * grid + ix] += 1.0;
  }
  double const peak = *std::max_element(counts.begin(), counts.end());
  GrayImage img(grid, grid);
  if (peak > 0.0) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      img.pixels[i] = static_cast<std::uint8_t>(std::llround(counts[i] / peak * 255.0));
    }
  }
  return img;
}

}  // namespace fdpo
