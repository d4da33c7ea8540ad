#pragma once
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

#include <cstdint>
#include <span>
#include <vector>

#include "fdpo/diffusion.hpp"

namespace fdpo {

/// Dense 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h);
  GrayImage(int w, int h, std::vector<std::uint8_t> px);

  std::uint8_t at(int row, int col) const
  {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  std::uint8_t &at(int row, int col)
  {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

/// Shannon entropy (bits) of the 256-bin gray-level histogram; in [0, 8].
double entropy1d(GrayImage const &img);

/// Entropy (bits) of the joint histogram of (pixel level, rounded mean of the
/// surrounding neighborhood). The neighborhood mean excludes the center pixel
/// and uses replicate padding at the borders; in [0, 16].
double entropy2d(GrayImage const &img, int neighborhood = 3);

/// Root mean squared pixel difference on intensities rescaled to [0,1].
double rmse(GrayImage const &a, GrayImage const &b);

/// Peak signal-to-noise ratio in dB on the 0..255 scale. Identical images
/// have zero MSE; that case is a distinguished marker rather than a float so
/// aggregation cannot silently average infinities.
struct PsnrResult {
  bool infinite = false;
  double db = 0.0;
};
PsnrResult psnr(GrayImage const &a, GrayImage const &b);

/// Mean over sliding 11x11 Gaussian-weighted windows (sigma 1.5) of the
/// luminance/contrast/structure product with unit exponents;
/// c1=(0.01*255)^2, c2=(0.03*255)^2, c3=c2/2. Needs at least 11x11 input.
double ssim(GrayImage const &a, GrayImage const &b);

/// Feature similarity from phase congruency (4-scale, 4-orientation log-Gabor
/// bank) and Scharr gradient magnitude, pooled by the pointwise max of the
/// two congruency maps; T1=0.85, T2=160. Needs at least 32x32 input.
double fsim(GrayImage const &a, GrayImage const &b);

struct DiversitySummary {
  int mode_coverage = 0;
  double mean_pairwise_distance = 0.0;
};

/// mode_coverage counts centers with at least one sample within radius;
/// the mean pairwise Euclidean distance is exact up to 2000 samples and
/// computed on a fixed-seed subsample beyond that.
DiversitySummary sampleDiversity(std::span<Sample2D const> samples,
                                 std::span<Sample2D const> mode_centers, double radius);

/// 2-D histogram of the samples over [-extent, extent]^2 scaled so the
/// fullest cell maps to 255. Samples outside the square are ignored.
GrayImage rasterize(std::span<Sample2D const> samples, int grid, double extent);

}  // namespace fdpo
