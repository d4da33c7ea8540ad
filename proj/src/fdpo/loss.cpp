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

#include "fdpo/loss.hpp"

#include <algorithm>
#include <cmath>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"

namespace fdpo {

namespace detail {

double softplus(double z)
{
  if (z > 0.0) {
    return z + std::log1p(std::exp(-z));
  }
  return std::log1p(std::exp(z));
}

void validate(LossConfig const &cfg)
{
  if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) {
    throw Error(ErrorCode::InvalidArgument,
                "penalty coefficient beta must be positive and finite, got " +
                    formatDouble(cfg.beta));
  }
}

}  // namespace detail

namespace {

void validatePair(RatioPair pair)
{
  if (!(pair.x1 > 0.0) || !std::isfinite(pair.x1) || !(pair.x2 > 0.0) ||
      !std::isfinite(pair.x2)) {
    throw Error(ErrorCode::Domain, "probability ratios must be positive and finite (x1=" +
                                       formatDouble(pair.x1) +
                                       ", x2=" + formatDouble(pair.x2) + ")");
  }
}

double logSumExp(double a, double b)
{
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  if (std::isinf(hi) && hi > 0.0) {
    return hi;
  }
  return hi + std::log1p(std::exp(lo - hi));
}

/// ln sigma(u) = -softplus(-u).
double logSigmoid(double u)
{
  return -detail::softplus(-u);
}

double sigmoid(double u)
{
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

double generalizedLossFromLog(LossConfig const &cfg, LogRatioPair pair)
{
  detail::validate(cfg);
  double z = cfg.beta * cfg.divergence.fPrimeFromLog(pair.log_x1) -
             cfg.beta * cfg.divergence.fPrimeFromLog(pair.log_x2);
  return detail::softplus(-z);
}

double generalizedLoss(LossConfig const &cfg, RatioPair pair)
{
  validatePair(pair);
  return generalizedLossFromLog(cfg, {std::log(pair.x1), std::log(pair.x2)});
}

GradientPair lossGradientsFromLog(LossConfig const &cfg, LogRatioPair pair)
{
  detail::validate(cfg);
  double z = cfg.beta * cfg.divergence.fPrimeFromLog(pair.log_x1) -
             cfg.beta * cfg.divergence.fPrimeFromLog(pair.log_x2);
  // ln(beta (1-sigma(z))) = ln beta + ln sigma(-z); keeps saturated sigmoids
  // away from 0*inf against huge f''.
  double log_scale = std::log(cfg.beta) + logSigmoid(-z);
  double d1 = -std::exp(log_scale + cfg.divergence.logFDoublePrimeFromLog(pair.log_x1));
  double d2 = std::exp(log_scale + cfg.divergence.logFDoublePrimeFromLog(pair.log_x2));
  return {d1, d2};
}

GradientPair lossGradients(LossConfig const &cfg, RatioPair pair)
{
  validatePair(pair);
  return lossGradientsFromLog(cfg, {std::log(pair.x1), std::log(pair.x2)});
}

GradientPair lossGradientsWrtLog(LossConfig const &cfg, LogRatioPair pair)
{
  detail::validate(cfg);
  double z = cfg.beta * cfg.divergence.fPrimeFromLog(pair.log_x1) -
             cfg.beta * cfg.divergence.fPrimeFromLog(pair.log_x2);
  double log_scale = std::log(cfg.beta) + logSigmoid(-z);
  // dL/dlog x = dL/dx * x, folded into the exponent.
  double d1 = -std::exp(log_scale + cfg.divergence.logFDoublePrimeFromLog(pair.log_x1) +
                        pair.log_x1);
  double d2 = std::exp(log_scale + cfg.divergence.logFDoublePrimeFromLog(pair.log_x2) +
                       pair.log_x2);
  return {d1, d2};
}

double gradientRatio(LossConfig const &cfg, RatioPair pair)
{
  detail::validate(cfg);
  validatePair(pair);
  double l1 = cfg.divergence.logFDoublePrimeFromLog(std::log(pair.x1));
  double l2 = cfg.divergence.logFDoublePrimeFromLog(std::log(pair.x2));
  return std::exp(l1 - l2);
}

GradientPair closedFormGradients(LossConfig const &cfg, RatioPair pair)
{
  detail::validate(cfg);
  validatePair(pair);
  double const beta = cfg.beta;
  double const log_beta = std::log(beta);
  double const lx1 = std::log(pair.x1);
  double const lx2 = std::log(pair.x2);

  double log_d1;  // ln |dL/dx1|
  double log_d2;  // ln dL/dx2
  switch (cfg.divergence.kind()) {
  case DivergenceKind::ReverseKl: {
    double lse = logSumExp(beta * lx1, beta * lx2);
    log_d1 = log_beta + beta * lx2 - lx1 - lse;
    log_d2 = log_beta + (beta - 1.0) * lx2 - lse;
    break;
  }
  case DivergenceKind::JensenShannon: {
    double l1p_x1 = std::log1p(pair.x1);
    double l1p_x2 = std::log1p(pair.x2);
    double lse = logSumExp(beta * (lx2 + l1p_x1), beta * (lx1 + l1p_x2));
    log_d1 = log_beta - lx1 + beta * lx2 + (beta - 1.0) * l1p_x1 - lse;
    log_d2 = log_beta - l1p_x2 + (beta - 1.0) * lx2 + beta * l1p_x1 - lse;
    break;
  }
  case DivergenceKind::Alpha: {
    double a = cfg.divergence.alphaValue();
    double e1 = (beta / a) * std::pow(pair.x1, -a);
    double e2 = (beta / a) * std::pow(pair.x2, -a);
    double log_frac = logSigmoid(e1 - e2);  // e^{e1}/(e^{e1}+e^{e2})
    log_d1 = log_beta - (1.0 + a) * lx1 + log_frac;
    log_d2 = log_beta - (1.0 + a) * lx2 + log_frac;
    break;
  }
  case DivergenceKind::ForwardKl: {
    double e1 = beta / pair.x1;
    double e2 = beta / pair.x2;
    double log_frac = logSigmoid(e1 - e2);
    log_d1 = log_beta - 2.0 * lx1 + log_frac;
    log_d2 = log_beta - 2.0 * lx2 + log_frac;
    break;
  }
  default:
    throw Error(ErrorCode::Internal, "unreachable divergence kind");
  }

  double d1 = std::exp(log_d1);
  double d2 = std::exp(log_d2);
  if (std::isinf(d1) || std::isinf(d2)) {
    throw Error(ErrorCode::Overflow,
                "closed-form gradient is not representable in double precision at x1=" +
                    formatDouble(pair.x1) + ", x2=" + formatDouble(pair.x2) +
                    ", beta=" + formatDouble(beta));
  }
  return {-d1, d2};
}

double sigmaBtPreference(double r_w, double r_l)
{
  if (!std::isfinite(r_w) || !std::isfinite(r_l)) {
    throw Error(ErrorCode::Domain, "rewards must be finite");
  }
  return sigmoid(r_w - r_l);
}

std::vector<std::pair<std::string, double>> verifyRatioOrdering(double x1, double x2)
{
  if (!(x2 > 0.0) || !(x2 < x1) || !std::isfinite(x1)) {
    throw Error(ErrorCode::InvalidArgument,
                "ratio ordering requires 0 < x2 < x1, got x1=" + formatDouble(x1) +
                    ", x2=" + formatDouble(x2));
  }
  double const r = x2 / x1;
  double const fkl = r * r;
  double const js = (x2 * (x2 + 1.0)) / (x1 * (x1 + 1.0));
  double const rkl = r;
  double const a8 = std::pow(r, 1.8);
  double const a6 = std::pow(r, 1.6);
  double const a4 = std::pow(r, 1.4);
  double const a2 = std::pow(r, 1.2);

  bool chain_js = 0.0 < fkl && fkl < js && js < rkl && rkl < 1.0;
  bool chain_alpha = fkl < a8 && a8 < a6 && a6 < a4 && a4 < a2 && a2 < rkl;
  if (!chain_js || !chain_alpha) {
    throw Error(ErrorCode::Internal,
                "gradient-ratio ordering chain violated at x1=" + formatDouble(x1) +
                    ", x2=" + formatDouble(x2));
  }

  std::vector<std::pair<std::string, double>> out = {
      {"forward-kl", fkl}, {"alpha:0.8", a8}, {"alpha:0.6", a6}, {"alpha:0.4", a4},
      {"alpha:0.2", a2},   {"js", js},        {"reverse-kl", rkl},
  };
  std::sort(out.begin(), out.end(),
            [](auto const &a, auto const &b) { return a.second < b.second; });
  return out;
}

}  // namespace fdpo
