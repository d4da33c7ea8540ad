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

#include "fdpo.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "fdpo/distribution.hpp"
#include "fdpo/divergence.hpp"
#include "fdpo/error.hpp"
#include "fdpo/loss.hpp"
#include "fdpo/metrics.hpp"
#include "fdpo/policy.hpp"
#include "fdpo/train_run.hpp"

struct fdpo_divergence {
  fdpo::Divergence impl;
  std::string name;
};

namespace {

thread_local std::string g_last_error;

fdpo_status statusOf(fdpo::ErrorCode code)
{
  using fdpo::ErrorCode;
  switch (code) {
  case ErrorCode::InvalidArgument:
    return FDPO_ERR_INVALID_ARGUMENT;
  case ErrorCode::Domain:
    return FDPO_ERR_DOMAIN;
  case ErrorCode::Range:
    return FDPO_ERR_RANGE;
  case ErrorCode::Shape:
    return FDPO_ERR_SHAPE;
  case ErrorCode::Support:
    return FDPO_ERR_SUPPORT;
  case ErrorCode::Overflow:
    return FDPO_ERR_OVERFLOW;
  case ErrorCode::Infeasible:
    return FDPO_ERR_INFEASIBLE;
  case ErrorCode::NoConvergence:
    return FDPO_ERR_NO_CONVERGENCE;
  case ErrorCode::Divergent:
    return FDPO_ERR_DIVERGENT;
  case ErrorCode::Config:
    return FDPO_ERR_CONFIG;
  case ErrorCode::Io:
    return FDPO_ERR_IO;
  case ErrorCode::Internal:
    return FDPO_ERR_INTERNAL;
  }
  return FDPO_ERR_INTERNAL;
}

/// Runs fn, translating exceptions into status codes + last-error text.
template <typename Fn>
fdpo_status guarded(Fn &&fn)
{
  try {
    fn();
    return FDPO_OK;
  } catch (fdpo::Error const &e) {
    g_last_error = e.what();
    return statusOf(e.code());
  } catch (std::bad_alloc const &) {
    g_last_error = "out of memory";
    return FDPO_ERR_INTERNAL;
  } catch (std::exception const &e) {
    g_last_error = e.what();
    return FDPO_ERR_INTERNAL;
  }
}

fdpo_status requireArgs(bool ok)
{
  if (!ok) {
    g_last_error = "null pointer argument";
    return FDPO_ERR_INVALID_ARGUMENT;
  }
  return FDPO_OK;
}

char *copyString(std::string const &s)
{
  char *out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fdpo::GrayImage makeImage(const uint8_t *pixels, uint32_t width, uint32_t height)
{
  if (pixels == nullptr || width == 0 || height == 0) {
    throw fdpo::Error(fdpo::ErrorCode::Shape, "image buffer must be non-empty");
  }
  std::vector<std::uint8_t> data(pixels,
                                 pixels + static_cast<std::size_t>(width) * height);
  return fdpo::GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<fdpo::Sample2D> unpackPoints(const double *xy, size_t n)
{
  if (xy == nullptr && n > 0) {
    throw fdpo::Error(fdpo::ErrorCode::InvalidArgument, "null point buffer");
  }
  std::vector<fdpo::Sample2D> points(n);
  for (size_t i = 0; i < n; ++i) {
    points[i] = {xy[2 * i], xy[2 * i + 1]};
  }
  return points;
}

}  // namespace

extern "C" {

const char *fdpo_version(void)
{
  return "0.1.0";
}

const char *fdpo_status_name(fdpo_status status)
{
  switch (status) {
  case FDPO_OK:
    return "ok";
  case FDPO_ERR_INVALID_ARGUMENT:
    return "invalid-argument";
  case FDPO_ERR_DOMAIN:
    return "domain";
  case FDPO_ERR_RANGE:
    return "range";
  case FDPO_ERR_SHAPE:
    return "shape";
  case FDPO_ERR_SUPPORT:
    return "support";
  case FDPO_ERR_OVERFLOW:
    return "overflow";
  case FDPO_ERR_INFEASIBLE:
    return "infeasible";
  case FDPO_ERR_NO_CONVERGENCE:
    return "no-convergence";
  case FDPO_ERR_DIVERGENT:
    return "divergent";
  case FDPO_ERR_CONFIG:
    return "config";
  case FDPO_ERR_IO:
    return "io";
  case FDPO_ERR_INTERNAL:
    return "internal";
  }
  return "unknown";
}

const char *fdpo_last_error(void)
{
  return g_last_error.c_str();
}

fdpo_status fdpo_divergence_create(const char *name, fdpo_divergence **out)
{
  if (auto st = requireArgs(name != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::Divergence d = fdpo::Divergence::parse(name);
    *out = new fdpo_divergence{d, d.name()};
  });
}

void fdpo_divergence_destroy(fdpo_divergence *divergence)
{
  delete divergence;
}

const char *fdpo_divergence_name(const fdpo_divergence *divergence)
{
  return divergence == nullptr ? nullptr : divergence->name.c_str();
}

fdpo_status fdpo_f_eval(const fdpo_divergence *divergence, double x, double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] { *out = divergence->impl.f(x); });
}

fdpo_status fdpo_f_prime(const fdpo_divergence *divergence, double x, double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] { *out = divergence->impl.fPrime(x); });
}

fdpo_status fdpo_f_double_prime(const fdpo_divergence *divergence, double x, double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] { *out = divergence->impl.fDoublePrime(x); });
}

fdpo_status fdpo_f_prime_inverse(const fdpo_divergence *divergence, double y, double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] { *out = divergence->impl.fPrimeInverse(y); });
}

fdpo_status fdpo_divergence_value(const fdpo_divergence *divergence, const double *p1,
                                  const double *p2, size_t n, double *out)
{
  if (auto st = requireArgs(divergence != nullptr && p1 != nullptr && p2 != nullptr &&
                            out != nullptr && n > 0);
      st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::FiniteDistribution d1(std::vector<double>(p1, p1 + n));
    fdpo::FiniteDistribution d2(std::vector<double>(p2, p2 + n));
    *out = fdpo::divergenceValue(divergence->impl, d1, d2);
  });
}

fdpo_status fdpo_loss(const fdpo_divergence *divergence, double beta, double x1, double x2,
                      double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::generalizedLoss({divergence->impl, beta}, {x1, x2});
  });
}

fdpo_status fdpo_loss_gradients(const fdpo_divergence *divergence, double beta, double x1,
                                double x2, double *d_x1, double *d_x2)
{
  if (auto st = requireArgs(divergence != nullptr && d_x1 != nullptr && d_x2 != nullptr);
      st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::GradientPair g = fdpo::lossGradients({divergence->impl, beta}, {x1, x2});
    *d_x1 = g.d_x1;
    *d_x2 = g.d_x2;
  });
}

fdpo_status fdpo_closed_form_gradients(const fdpo_divergence *divergence, double beta,
                                       double x1, double x2, double *d_x1, double *d_x2)
{
  if (auto st = requireArgs(divergence != nullptr && d_x1 != nullptr && d_x2 != nullptr);
      st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::GradientPair g = fdpo::closedFormGradients({divergence->impl, beta}, {x1, x2});
    *d_x1 = g.d_x1;
    *d_x2 = g.d_x2;
  });
}

fdpo_status fdpo_gradient_ratio(const fdpo_divergence *divergence, double x1, double x2,
                                double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::gradientRatio({divergence->impl, 1.0}, {x1, x2});
  });
}

fdpo_status fdpo_sigma_bt(double r_w, double r_l, double *out)
{
  if (auto st = requireArgs(out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] { *out = fdpo::sigmaBtPreference(r_w, r_l); });
}

fdpo_status fdpo_ratio_ordering(double x1, double x2, double *ratios, const char **labels)
{
  if (auto st = requireArgs(ratios != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    auto ordering = fdpo::verifyRatioOrdering(x1, x2);
    static thread_local std::vector<std::string> label_storage;
    label_storage.clear();
    for (std::size_t i = 0; i < ordering.size(); ++i) {
      ratios[i] = ordering[i].second;
      label_storage.push_back(ordering[i].first);
    }
    if (labels != nullptr) {
      for (std::size_t i = 0; i < ordering.size(); ++i) {
        labels[i] = label_storage[i].c_str();
      }
    }
  });
}

fdpo_status fdpo_solve_optimal_policy(const fdpo_divergence *divergence, double beta,
                                      const double *q, const double *pi_ref, size_t n,
                                      double *policy_out, double *lambda_out,
                                      double *residual_out)
{
  if (auto st = requireArgs(divergence != nullptr && q != nullptr && pi_ref != nullptr &&
                            policy_out != nullptr && lambda_out != nullptr &&
                            residual_out != nullptr && n > 0);
      st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::DiscreteAlignmentProblem problem{
        std::vector<double>(q, q + n),
        fdpo::FiniteDistribution(std::vector<double>(pi_ref, pi_ref + n)), beta,
        divergence->impl};
    fdpo::OptimalPolicySolution solution = fdpo::solveOptimalPolicy(problem);
    for (size_t i = 0; i < n; ++i) {
      policy_out[i] = solution.policy[i];
    }
    *lambda_out = solution.lambda;
    *residual_out = solution.residual;
  });
}

fdpo_status fdpo_reward_reparameterize(const fdpo_divergence *divergence, double beta,
                                       double p_theta, double p_ref, double *out)
{
  if (auto st = requireArgs(divergence != nullptr && out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::rewardReparameterize({divergence->impl, beta}, p_theta, p_ref);
  });
}

fdpo_status fdpo_recover_q(const fdpo_divergence *divergence, double beta,
                           const double *policy, const double *pi_ref, size_t n, double lambda,
                           double *q_out)
{
  if (auto st = requireArgs(divergence != nullptr && policy != nullptr && pi_ref != nullptr &&
                            q_out != nullptr && n > 0);
      st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::FiniteDistribution pol(std::vector<double>(policy, policy + n));
    fdpo::FiniteDistribution ref(std::vector<double>(pi_ref, pi_ref + n));
    std::vector<double> q = fdpo::recoverQFromPolicy(pol, ref, beta, divergence->impl, lambda);
    for (size_t i = 0; i < n; ++i) {
      q_out[i] = q[i];
    }
  });
}

fdpo_status fdpo_train_run(const char *config_json, char **effective_config_json,
                           char **trace_csv, char **policy_json, char **samples_csv,
                           char **summary_json)
{
  if (auto st = requireArgs(config_json != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::TrainRunOutput out = fdpo::runTrainFromJson(config_json);
    if (effective_config_json != nullptr) {
      *effective_config_json = copyString(out.effective_config_json);
    }
    if (trace_csv != nullptr) {
      *trace_csv = copyString(out.trace_csv);
    }
    if (policy_json != nullptr) {
      *policy_json = copyString(out.policy_json);
    }
    if (samples_csv != nullptr) {
      *samples_csv = copyString(out.samples_csv);
    }
    if (summary_json != nullptr) {
      *summary_json = copyString(out.summary_json);
    }
  });
}

void fdpo_string_free(char *s)
{
  delete[] s;
}

fdpo_status fdpo_entropy_1d(const uint8_t *pixels, uint32_t width, uint32_t height,
                            double *out)
{
  if (auto st = requireArgs(out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] { *out = fdpo::entropy1d(makeImage(pixels, width, height)); });
}

fdpo_status fdpo_entropy_2d(const uint8_t *pixels, uint32_t width, uint32_t height,
                            uint32_t neighborhood, double *out)
{
  if (auto st = requireArgs(out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::entropy2d(makeImage(pixels, width, height), static_cast<int>(neighborhood));
  });
}

fdpo_status fdpo_rmse(const uint8_t *a, const uint8_t *b, uint32_t width, uint32_t height,
                      double *out)
{
  if (auto st = requireArgs(out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::rmse(makeImage(a, width, height), makeImage(b, width, height));
  });
}

fdpo_status fdpo_psnr(const uint8_t *a, const uint8_t *b, uint32_t width, uint32_t height,
                      double *out_db, int *out_is_infinite)
{
  if (auto st = requireArgs(out_db != nullptr && out_is_infinite != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    fdpo::PsnrResult r = fdpo::psnr(makeImage(a, width, height), makeImage(b, width, height));
    *out_db = r.db;
    *out_is_infinite = r.infinite ? 1 : 0;
  });
}

fdpo_status fdpo_ssim(const uint8_t *a, const uint8_t *b, uint32_t width, uint32_t height,
                      double *out)
{
  if (auto st = requireArgs(out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::ssim(makeImage(a, width, height), makeImage(b, width, height));
  });
}

fdpo_status fdpo_fsim(const uint8_t *a, const uint8_t *b, uint32_t width, uint32_t height,
                      double *out)
{
  if (auto st = requireArgs(out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    *out = fdpo::fsim(makeImage(a, width, height), makeImage(b, width, height));
  });
}

fdpo_status fdpo_sample_diversity(const double *xy, size_t n_samples, const double *centers_xy,
                                  size_t n_centers, double radius, uint32_t *coverage_out,
                                  double *mean_pairwise_out)
{
  if (auto st = requireArgs(coverage_out != nullptr && mean_pairwise_out != nullptr);
      st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    auto samples = unpackPoints(xy, n_samples);
    auto centers = unpackPoints(centers_xy, n_centers);
    fdpo::DiversitySummary summary = fdpo::sampleDiversity(samples, centers, radius);
    *coverage_out = static_cast<uint32_t>(summary.mode_coverage);
    *mean_pairwise_out = summary.mean_pairwise_distance;
  });
}

fdpo_status fdpo_rasterize(const double *xy, size_t n_samples, uint32_t grid, double extent,
                           uint8_t *pixels_out)
{
  if (auto st = requireArgs(pixels_out != nullptr); st != FDPO_OK) {
    return st;
  }
  return guarded([&] {
    auto samples = unpackPoints(xy, n_samples);
    fdpo::GrayImage img = fdpo::rasterize(samples, static_cast<int>(grid), extent);
    std::memcpy(pixels_out, img.pixels.data(), img.pixels.size());
  });
}

}  // extern "C"
