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

#include "fdpo/phase_congruency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "fdpo/error.hpp"

namespace fdpo {

namespace {

constexpr int kScales = 4;
constexpr int kOrientations = 4;
constexpr double kMinWavelength = 6.0;
constexpr double kMult = 2.0;
constexpr double kSigmaOnf = 0.55;
constexpr double kDThetaOnSigma = 1.2;
constexpr double kNoiseK = 2.0;
constexpr double kEpsilon = 1e-4;
constexpr double kLowpassCutoff = 0.45;
constexpr int kLowpassOrder = 15;
constexpr double kPi = 3.141592653589793;

// FFTW planning is not thread safe; execution of an existing plan is.
std::mutex &plannerMutex()
{
  static std::mutex m;
  return m;
}

/// Centered frequency coordinates in cycles/pixel, then rotated into the
/// unshifted FFT layout (index 0 = DC).
std::vector<double> frequencyAxis(int n)
{
  std::vector<double> shifted(static_cast<std::size_t>(n));
  if (n % 2 == 0) {
    for (int i = 0; i < n; ++i) {
      shifted[static_cast<std::size_t>(i)] = static_cast<double>(i - n / 2) / n;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      shifted[static_cast<std::size_t>(i)] = static_cast<double>(i - (n - 1) / 2) / (n - 1);
    }
  }
  std::vector<double> axis(static_cast<std::size_t>(n));
  int const half = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    axis[static_cast<std::size_t>(i)] = shifted[static_cast<std::size_t>((i + half) % n)];
  }
  return axis;
}

double medianOf(std::vector<double> values)
{
  std::size_t const n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  double m = *mid;
  if (n % 2 == 0) {
    auto lower = std::max_element(values.begin(), mid);
    m = 0.5 * (m + *lower);
  }
  return m;
}

}  // namespace

std::vector<double> phaseCongruency(std::vector<double> const &image, int width, int height)
{
  if (width < 2 || height < 2 ||
      image.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::Shape, "phase congruency needs a dense 2-D image");
  }
  std::size_t const n = image.size();

  fftw_complex *buf_in = nullptr;
  fftw_complex *buf_freq = nullptr;
  fftw_complex *buf_resp = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  {
    std::lock_guard<std::mutex> lock(plannerMutex());
    buf_in = fftw_alloc_complex(n);
    buf_freq = fftw_alloc_complex(n);
    buf_resp = fftw_alloc_complex(n);
    forward = fftw_plan_dft_2d(height, width, buf_in, buf_in, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_2d(height, width, buf_freq, buf_resp, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  for (std::size_t i = 0; i < n; ++i) {
    buf_in[i][0] = image[i];
    buf_in[i][1] = 0.0;
  }
  fftw_execute(forward);

  // Radial frequency and angle per bin, DC pinned to radius 1 so the
  // log-Gabor expression stays finite (the filters zero DC explicitly).
  std::vector<double> const fx = frequencyAxis(width);
  std::vector<double> const fy = frequencyAxis(height);
  std::vector<double> radius(n);
  std::vector<double> sin_theta(n);
  std::vector<double> cos_theta(n);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      std::size_t const i = static_cast<std::size_t>(r) * width + c;
      double const x = fx[static_cast<std::size_t>(c)];
      double const y = fy[static_cast<std::size_t>(r)];
      double rad = std::sqrt(x * x + y * y);
      double const theta = std::atan2(-y, x);
      sin_theta[i] = std::sin(theta);
      cos_theta[i] = std::cos(theta);
      radius[i] = (r == 0 && c == 0) ? 1.0 : rad;
    }
  }

  std::vector<std::vector<double>> radial(kScales, std::vector<double>(n));
  double const log_sigma = std::log(kSigmaOnf);
  for (int s = 0; s < kScales; ++s) {
    double const wavelength = kMinWavelength * std::pow(kMult, s);
    double const f0 = 1.0 / wavelength;
    for (std::size_t i = 0; i < n; ++i) {
      double const lr = std::log(radius[i] / f0);
      double const gabor = std::exp(-(lr * lr) / (2.0 * log_sigma * log_sigma));
      double const lowpass =
          1.0 / (1.0 + std::pow(radius[i] / kLowpassCutoff, 2.0 * kLowpassOrder));
      radial[static_cast<std::size_t>(s)][i] = gabor * lowpass;
    }
    radial[static_cast<std::size_t>(s)][0] = 0.0;
  }

  double const theta_sigma = kPi / kOrientations / kDThetaOnSigma;
  std::vector<double> total_energy(n, 0.0);
  std::vector<double> total_sum_an(n, 0.0);

  std::vector<double> spread(n);
  std::vector<std::vector<double>> even(kScales, std::vector<double>(n));
  std::vector<std::vector<double>> odd(kScales, std::vector<double>(n));
  std::vector<double> sum_e(n);
  std::vector<double> sum_o(n);
  std::vector<double> sum_an(n);
  std::vector<double> scale1_an(n);

  for (int o = 0; o < kOrientations; ++o) {
    double const angle = o * kPi / kOrientations;
    double const cos_a = std::cos(angle);
    double const sin_a = std::sin(angle);
    for (std::size_t i = 0; i < n; ++i) {
      double const ds = sin_theta[i] * cos_a - cos_theta[i] * sin_a;
      double const dc = cos_theta[i] * cos_a + sin_theta[i] * sin_a;
      double const dtheta = std::abs(std::atan2(ds, dc));
      spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
    }

    std::fill(sum_e.begin(), sum_e.end(), 0.0);
    std::fill(sum_o.begin(), sum_o.end(), 0.0);
    std::fill(sum_an.begin(), sum_an.end(), 0.0);

    for (int s = 0; s < kScales; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double const filt = radial[static_cast<std::size_t>(s)][i] * spread[i];
        buf_freq[i][0] = buf_in[i][0] * filt;
        buf_freq[i][1] = buf_in[i][1] * filt;
      }
      fftw_execute(backward);
      double const norm = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        double const e = buf_resp[i][0] * norm;
        double const od = buf_resp[i][1] * norm;
        even[static_cast<std::size_t>(s)][i] = e;
        odd[static_cast<std::size_t>(s)][i] = od;
        double const an = std::sqrt(e * e + od * od);
        sum_e[i] += e;
        sum_o[i] += od;
        sum_an[i] += an;
        if (s == 0) {
          scale1_an[i] = an;
        }
      }
    }

    // Energy along the mean phase direction, penalized by phase deviation.
    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double const x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kEpsilon;
      double const mean_e = sum_e[i] / x_energy;
      double const mean_o = sum_o[i] / x_energy;
      double acc = 0.0;
      for (int s = 0; s < kScales; ++s) {
        double const e = even[static_cast<std::size_t>(s)][i];
        double const od = odd[static_cast<std::size_t>(s)][i];
        acc += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
      }
      energy[i] = acc;
    }

    // Rayleigh-model noise threshold from the smallest-wavelength response.
    double const tau = medianOf(scale1_an) / std::sqrt(std::log(4.0));
    double const total_tau = tau * (1.0 - std::pow(1.0 / kMult, kScales)) / (1.0 - 1.0 / kMult);
    double const noise_mean = total_tau * std::sqrt(kPi / 2.0);
    double const noise_sigma = total_tau * std::sqrt((4.0 - kPi) / 2.0);
    double const threshold = (noise_mean + kNoiseK * noise_sigma) / 1.7;

    for (std::size_t i = 0; i < n; ++i) {
      total_energy[i] += std::max(energy[i] - threshold, 0.0);
      total_sum_an[i] += sum_an[i];
    }
  }

  std::vector<double> pc(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc[i] = total_energy[i] / (total_sum_an[i] + kEpsilon);
  }

  {
    std::lock_guard<std::mutex> lock(plannerMutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(buf_in);
    fftw_free(buf_freq);
    fftw_free(buf_resp);
  }
  return pc;
}

}  // namespace fdpo
