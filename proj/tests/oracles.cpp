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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "fdpo/error.hpp"
#include "fdpo/rng.hpp"

namespace fdpo::testing {

double centralDifference(std::function<double(double)> const &f, double x, double h)
{
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double relDev(double a, double b, double floor)
{
  double const scale = std::max(std::abs(a), std::abs(b));
  if (scale < floor) {
    return 0.0;
  }
  return std::abs(a - b) / scale;
}

double naiveEntropy1d(GrayImage const &img)
{
  std::map<int, long> counts;
  for (auto v : img.pixels) {
    counts[v]++;
  }
  double const total = static_cast<double>(img.pixels.size());
  double h = 0.0;
  for (auto const &[level, count] : counts) {
    double const p = count / total;
    h -= p * std::log(p) / std::log(2.0);
  }
  return h;
}

double naiveEntropy2d(GrayImage const &img, int neighborhood)
{
  // Build an explicitly padded copy, then count (level, rounded mean of the
  // surrounding window) tuples with a map.
  int const half = neighborhood / 2;
  int const ph = img.height + 2 * half;
  int const pw = img.width + 2 * half;
  std::vector<int> padded(static_cast<std::size_t>(ph) * pw);
  for (int r = 0; r < ph; ++r) {
    for (int c = 0; c < pw; ++c) {
      int const rr = std::clamp(r - half, 0, img.height - 1);
      int const cc = std::clamp(c - half, 0, img.width - 1);
      padded[static_cast<std::size_t>(r) * pw + c] = img.at(rr, cc);
    }
  }
  std::map<std::pair<int, int>, long> counts;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      long sum = 0;
      for (int dr = 0; dr < neighborhood; ++dr) {
        for (int dc = 0; dc < neighborhood; ++dc) {
          sum += padded[static_cast<std::size_t>(r + dr) * pw + (c + dc)];
        }
      }
      sum -= img.at(r, c);
      int const window = neighborhood * neighborhood - 1;
      auto const j = static_cast<int>(std::llround(static_cast<double>(sum) / window));
      counts[{img.at(r, c), j}]++;
    }
  }
  double const total = static_cast<double>(img.pixels.size());
  double h = 0.0;
  for (auto const &[key, count] : counts) {
    double const p = count / total;
    h -= p * std::log(p) / std::log(2.0);
  }
  return h;
}

double naiveRmse(GrayImage const &a, GrayImage const &b)
{
  long long acc = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    long long const d = static_cast<long long>(a.pixels[i]) - b.pixels[i];
    acc += d * d;
  }
  return std::sqrt(static_cast<double>(acc) /
                   (255.0 * 255.0 * static_cast<double>(a.pixels.size())));
}

double alignmentObjective(DiscreteAlignmentProblem const &problem,
                          std::vector<double> const &policy)
{
  double value = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    value += policy[i] * problem.q_values[i];
    value -= problem.beta * problem.pi_ref[i] *
             problem.divergence.f(std::max(policy[i], 1e-300) / problem.pi_ref[i]);
  }
  return value;
}

namespace {

std::vector<double> clampToSimplex(std::vector<double> v)
{
  double sum = 0.0;
  for (double &x : v) {
    x = std::max(x, 1e-12);
    sum += x;
  }
  for (double &x : v) {
    x /= sum;
  }
  return v;
}

}  // namespace

SimplexSearchResult simplexGridSearchOracle(DiscreteAlignmentProblem const &problem,
                                            double grid_step)
{
  std::size_t const n = problem.q_values.size();
  SimplexSearchResult best;
  best.objective = -1e300;

  auto consider = [&](std::vector<double> const &candidate) {
    double const value = alignmentObjective(problem, candidate);
    if (value > best.objective) {
      best.objective = value;
      best.policy = candidate;
    }
  };

  if (n == 1) {
    consider({1.0});
    return best;
  }
  if (n == 2) {
    for (double p = grid_step; p < 1.0; p += grid_step) {
      consider({p, 1.0 - p});
    }
  } else if (n == 3) {
    for (double p = grid_step; p < 1.0; p += grid_step) {
      for (double q = grid_step; p + q < 1.0; q += grid_step) {
        consider({p, q, 1.0 - p - q});
      }
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "simplex oracle supports at most 3 actions");
  }

  // Pattern search around the grid winner: +/- h along coordinate pairs,
  // halving h down to 1e-9.
  for (double h = grid_step; h > 1e-9; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) {
            continue;
          }
          std::vector<double> candidate = best.policy;
          if (candidate[j] <= h) {
            continue;
          }
          candidate[i] += h;
          candidate[j] -= h;
          candidate = clampToSimplex(std::move(candidate));
          double const value = alignmentObjective(problem, candidate);
          if (value > best.objective) {
            best.objective = value;
            best.policy = candidate;
            improved = true;
          }
        }
      }
    }
  }
  return best;
}

GrayImage randomImage(int width, int height, std::uint64_t seed)
{
  Rng rng(seed);
  GrayImage img(width, height);
  for (auto &px : img.pixels) {
    px = static_cast<std::uint8_t>(rng.below(256));
  }
  return img;
}

GrayImage ssimFixtureA()
{
  GrayImage img(16, 16);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      img.at(r, c) = static_cast<std::uint8_t>((255 * (r + c)) / 30);
    }
  }
  return img;
}

GrayImage ssimFixtureB()
{
  GrayImage const a = ssimFixtureA();
  GrayImage img(16, 16);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      img.at(r, c) = a.at(r, std::max(c - 1, 0));
    }
  }
  return img;
}

GrayImage fsimFixtureA()
{
  GrayImage img(64, 64);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      img.at(r, c) = static_cast<std::uint8_t>(((r / 8 + c / 8) % 2) * 170 + ((r * c) % 37) * 2);
    }
  }
  return img;
}

GrayImage fsimFixtureB()
{
  GrayImage const a = fsimFixtureA();
  GrayImage img(64, 64);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      int const v = (a.at(std::max(r - 1, 0), std::max(c - 1, 0)) * 9) / 10 + 20;
      img.at(r, c) = static_cast<std::uint8_t>(std::min(v, 255));
    }
  }
  return img;
}

}  // namespace fdpo::testing
