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

#include "fdpo/divergence.hpp"

#include <cmath>
#include <limits>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"

namespace fdpo {

namespace {

constexpr double kZeroFold = 1e-300;
constexpr double kLn2 = 0.6931471805599453;
const double kInf = std::numeric_limits<double>::infinity();

void requirePositive(double x)
{
  if (!(x > 0.0)) {
    throw Error(ErrorCode::Domain,
                "f-divergence generator requires x > 0, got " + formatDouble(x));
  }
}

}  // namespace

Divergence Divergence::reverseKl()
{
  return Divergence(DivergenceKind::ReverseKl, 0.0);
}

Divergence Divergence::forwardKl()
{
  return Divergence(DivergenceKind::ForwardKl, 0.0);
}

Divergence Divergence::alpha(double a)
{
  if (!(a > 0.0) || !(a < 1.0)) {
    throw Error(ErrorCode::Config,
                "alpha must lie in the open interval (0,1); the endpoints are the "
                "dedicated reverse-kl / forward-kl kinds (got " +
                    formatDouble(a) + ")");
  }
  return Divergence(DivergenceKind::Alpha, a);
}

Divergence Divergence::jensenShannon()
{
  return Divergence(DivergenceKind::JensenShannon, 0.0);
}

Divergence Divergence::parse(std::string_view name)
{
  if (name == "reverse-kl") {
    return reverseKl();
  }
  if (name == "forward-kl") {
    return forwardKl();
  }
  if (name == "js") {
    return jensenShannon();
  }
  constexpr std::string_view prefix = "alpha:";
  if (name.substr(0, prefix.size()) == prefix) {
    std::string value(name.substr(prefix.size()));
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(value, &used);
    } catch (std::exception const &) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw Error(ErrorCode::Config, "malformed alpha divergence spec: '" + std::string(name) + "'");
    }
    return alpha(a);
  }
  throw Error(ErrorCode::Config,
              "unknown divergence '" + std::string(name) +
                  "' (expected reverse-kl, forward-kl, alpha:<value> or js)");
}

std::string Divergence::name() const
{
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return "reverse-kl";
  case DivergenceKind::ForwardKl:
    return "forward-kl";
  case DivergenceKind::Alpha:
    return "alpha:" + formatDouble(alpha_);
  case DivergenceKind::JensenShannon:
    return "js";
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::f(double x) const
{
  requirePositive(x);
  if (x < kZeroFold) {
    double limit = fZeroLimit();
    if (std::isinf(limit)) {
      throw Error(ErrorCode::Overflow, "forward KL generator diverges as x -> 0+");
    }
    return limit;
  }
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return x * std::log(x);
  case DivergenceKind::ForwardKl:
    return -std::log(x);
  case DivergenceKind::Alpha:
    return (std::pow(x, 1.0 - alpha_) - (1.0 - alpha_) * x - alpha_) /
           (alpha_ * (alpha_ - 1.0));
  case DivergenceKind::JensenShannon:
    return x * std::log(2.0 * x / (x + 1.0)) + std::log(2.0 / (x + 1.0));
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::fPrime(double x) const
{
  requirePositive(x);
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return std::log(x) + 1.0;
  case DivergenceKind::ForwardKl:
    return -1.0 / x;
  case DivergenceKind::Alpha:
    return (1.0 - std::pow(x, -alpha_)) / alpha_;
  case DivergenceKind::JensenShannon:
    return std::log(2.0 * x / (1.0 + x));
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::fDoublePrime(double x) const
{
  requirePositive(x);
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return 1.0 / x;
  case DivergenceKind::ForwardKl:
    return 1.0 / (x * x);
  case DivergenceKind::Alpha:
    return std::pow(x, -(alpha_ + 1.0));
  case DivergenceKind::JensenShannon:
    return 1.0 / (x * (1.0 + x));
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::fPrimeInverse(double y) const
{
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return std::exp(y - 1.0);
  case DivergenceKind::ForwardKl:
    if (!(y < 0.0)) {
      throw Error(ErrorCode::Range,
                  "forward KL f' maps (0,inf) onto (-inf,0); y=" + formatDouble(y) +
                      " is outside that interval");
    }
    return -1.0 / y;
  case DivergenceKind::Alpha:
    if (!(y < 1.0 / alpha_)) {
      throw Error(ErrorCode::Range,
                  "alpha divergence f' has range (-inf," + formatDouble(1.0 / alpha_) +
                      "); y=" + formatDouble(y) + " is outside that interval");
    }
    return std::pow(1.0 - alpha_ * y, -1.0 / alpha_);
  case DivergenceKind::JensenShannon: {
    if (!(y < kLn2)) {
      throw Error(ErrorCode::Range, "JS f' has range (-inf,ln 2); y=" + formatDouble(y) +
                                        " is outside that interval");
    }
    double e = std::exp(y);
    return e / (2.0 - e);
  }
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::fPrimeFromLog(double log_x) const
{
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return log_x + 1.0;
  case DivergenceKind::ForwardKl:
    return -std::exp(-log_x);
  case DivergenceKind::Alpha:
    // (1 - e^{-a l}) / a with the cancellation-free expm1 form.
    return -std::expm1(-alpha_ * log_x) / alpha_;
  case DivergenceKind::JensenShannon: {
    // ln(2x/(1+x)) = ln2 + l - ln(1+e^l)
    double softplus = log_x > 0.0 ? log_x + std::log1p(std::exp(-log_x))
                                  : std::log1p(std::exp(log_x));
    return kLn2 + log_x - softplus;
  }
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::logFDoublePrimeFromLog(double log_x) const
{
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return -log_x;
  case DivergenceKind::ForwardKl:
    return -2.0 * log_x;
  case DivergenceKind::Alpha:
    return -(alpha_ + 1.0) * log_x;
  case DivergenceKind::JensenShannon: {
    double softplus = log_x > 0.0 ? log_x + std::log1p(std::exp(-log_x))
                                  : std::log1p(std::exp(log_x));
    return -log_x - softplus;
  }
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::fPrimeSup() const
{
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return kInf;
  case DivergenceKind::ForwardKl:
    return 0.0;
  case DivergenceKind::Alpha:
    return 1.0 / alpha_;
  case DivergenceKind::JensenShannon:
    return kLn2;
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

double Divergence::fZeroLimit() const
{
  switch (kind_) {
  case DivergenceKind::ReverseKl:
    return 0.0;
  case DivergenceKind::ForwardKl:
    return kInf;
  case DivergenceKind::Alpha:
    return 1.0 / (1.0 - alpha_);
  case DivergenceKind::JensenShannon:
    return kLn2;
  }
  throw Error(ErrorCode::Internal, "unreachable divergence kind");
}

}  // namespace fdpo
