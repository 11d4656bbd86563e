#include "erw/urn_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <fmt/format.h>

#include "erw/error.hpp"

namespace erw {

namespace {

constexpr int kGridPoints = 1000;
constexpr int kExactBinomialMaxK = 40;

std::uint64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  if (r > n - r) r = n - r;
  std::uint64_t result = 1;
  for (int i = 1; i <= r; ++i) {
    // exact: result * (n - r + i) is divisible by i at every step
    result = result * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

double log_binomial(int n, int r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

void check_k(int k) {
  if (k < 1 || k % 2 == 0) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("k must be an odd positive integer, got {}", k));
  }
}

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, fmt::format("p must lie in [0, 1], got {}", p));
  }
}

double parse_double(const std::string& key, const std::string& text) {
  // "a/b" is accepted for exact fractions such as p=5/6
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    return parse_double(key, text.substr(0, slash)) / parse_double(key, text.substr(slash + 1));
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("key '{}': cannot parse '{}' as a number", key, text));
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  double v = parse_double(key, text);
  if (v != std::floor(v) || std::fabs(v) > 1e9) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("key '{}': '{}' is not an integer", key, text));
  }
  return static_cast<int>(v);
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::NonDifferentiable: return "non-differentiable";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::InvalidTrajectory: return "invalid-trajectory";
    case ErrorKind::NoBifurcation: return "no-bifurcation";
    case ErrorKind::NoEscape: return "no-escape";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::ConventionMismatch: return "convention-mismatch";
  }
  return "unknown";
}

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::Domain, fmt::format("probability {} outside [0, 1]", value));
  }
}

static double majority_sum(int k, double q) noexcept {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  const int first = (k + 1) / 2;
  double sum = 0.0;
  if (k <= kExactBinomialMaxK) {
    for (int h = first; h <= k; ++h) {
      sum += static_cast<double>(binomial(k, h)) * std::pow(q, h) * std::pow(1.0 - q, k - h);
    }
  } else {
    const double lq = std::log(q);
    const double l1q = std::log1p(-q);
    for (int h = first; h <= k; ++h) {
      sum += std::exp(log_binomial(k, h) + h * lq + (k - h) * l1q);
    }
  }
  return std::min(1.0, sum);
}

Probability majority_prob(int k, Probability y) {
  check_k(k);
  return Probability(majority_sum(k, y.value()));
}

double majority_prob_derivative(int k, double y) {
  check_k(k);
  // d/dy P(Bin(k, y) >= m + 1) = k C(k-1, m) y^m (1-y)^m with m = (k-1)/2
  const int m = (k - 1) / 2;
  if (m == 0) return 1.0;
  const double w = y * (1.0 - y);
  if (w <= 0.0) return 0.0;
  if (k <= kExactBinomialMaxK) {
    return k * static_cast<double>(binomial(k - 1, m)) * std::pow(w, m);
  }
  return std::exp(std::log(static_cast<double>(k)) + log_binomial(k - 1, m) + m * std::log(w));
}

UrnFunction UrnFunction::linear(double p) {
  UrnFunction f;
  f.variant_ = UrnVariant::LinearK1;
  f.p_ = p;
  f.validate();
  return f;
}

UrnFunction UrnFunction::majority(int k, double p) {
  UrnFunction f;
  f.variant_ = UrnVariant::MajorityK;
  f.k_ = k;
  f.p_ = p;
  f.validate();
  return f;
}

UrnFunction UrnFunction::step_limit(double p) {
  UrnFunction f;
  f.variant_ = UrnVariant::StepLimit;
  f.p_ = p;
  f.validate();
  return f;
}

UrnFunction UrnFunction::kgw(double coupling) {
  UrnFunction f;
  f.variant_ = UrnVariant::KGW;
  f.coupling_ = coupling;
  f.validate();
  return f;
}

UrnFunction UrnFunction::polynomial(std::vector<double> coeffs) {
  UrnFunction f;
  f.variant_ = UrnVariant::Polynomial;
  f.coeffs_ = std::move(coeffs);
  f.validate();
  return f;
}

void UrnFunction::validate() const {
  switch (variant_) {
    case UrnVariant::MajorityK:
      check_k(k_);
      [[fallthrough]];
    case UrnVariant::LinearK1:
    case UrnVariant::StepLimit:
      check_p(p_);
      break;
    case UrnVariant::KGW:
      if (!std::isfinite(coupling_)) {
        throw Error(ErrorKind::InvalidParameter, "KGW coupling J must be finite");
      }
      break;
    case UrnVariant::Polynomial:
      if (coeffs_.empty()) {
        throw Error(ErrorKind::InvalidParameter, "polynomial urn function needs coefficients");
      }
      for (double c : coeffs_) {
        if (!std::isfinite(c)) {
          throw Error(ErrorKind::InvalidParameter, "polynomial coefficients must be finite");
        }
      }
      break;
  }
  constexpr double slack = 1e-15;
  for (int i = 0; i <= kGridPoints; ++i) {
    const double y = static_cast<double>(i) / kGridPoints;
    const double v = (*this)(y);
    if (!(v >= -slack && v <= 1.0 + slack)) {
      throw Error(ErrorKind::InvalidParameter,
                  fmt::format("urn function {} leaves [0, 1] at y={} (value {})", to_string(), y, v));
    }
  }
}

double UrnFunction::operator()(double y) const noexcept {
  switch (variant_) {
    case UrnVariant::LinearK1:
      return (1.0 - p_) + (2.0 * p_ - 1.0) * y;
    case UrnVariant::MajorityK: {
      if (k_ == 1) return (1.0 - p_) + (2.0 * p_ - 1.0) * y;
      if (k_ == 3) return (1.0 - p_) + (2.0 * p_ - 1.0) * (y * y * (3.0 - 2.0 * y));
      return (1.0 - p_) + (2.0 * p_ - 1.0) * majority_sum(k_, y);
    }
    case UrnVariant::StepLimit: {
      const double h = y > 0.5 ? 1.0 : (y < 0.5 ? 0.0 : 0.5);
      return (1.0 - p_) + (2.0 * p_ - 1.0) * h;
    }
    case UrnVariant::KGW:
      return 0.5 * (1.0 + std::tanh(coupling_ * (2.0 * y - 1.0)));
    case UrnVariant::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + *it;
      return acc;
    }
  }
  return 0.0;
}

double UrnFunction::derivative(double y) const {
  switch (variant_) {
    case UrnVariant::LinearK1:
      return 2.0 * p_ - 1.0;
    case UrnVariant::MajorityK:
      if (k_ == 3) return (2.0 * p_ - 1.0) * 6.0 * y * (1.0 - y);
      return (2.0 * p_ - 1.0) * majority_prob_derivative(k_, y);
    case UrnVariant::StepLimit:
      if (y == 0.5) {
        throw Error(ErrorKind::NonDifferentiable, "step-limit urn function jumps at y=1/2");
      }
      return 0.0;
    case UrnVariant::KGW: {
      const double t = std::tanh(coupling_ * (2.0 * y - 1.0));
      return coupling_ * (1.0 - t * t);
    }
    case UrnVariant::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * y + static_cast<double>(i) * coeffs_[i];
      return acc;
    }
  }
  return 0.0;
}

double UrnFunction::inverse(double q) const {
  if (!is_increasing()) {
    throw Error(ErrorKind::Unsupported,
                fmt::format("{} is not strictly increasing; no inverse", to_string()));
  }
  const double lo_val = (*this)(0.0);
  const double hi_val = (*this)(1.0);
  if (!(q >= lo_val && q <= hi_val)) {
    throw Error(ErrorKind::Domain,
                fmt::format("inverse argument {} outside range [{}, {}]", q, lo_val, hi_val));
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((*this)(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::fabs((*this)(lo) - q) <= std::fabs((*this)(hi) - q) ? lo : hi;
}

bool UrnFunction::is_symmetric() const noexcept {
  return variant_ != UrnVariant::Polynomial;
}

bool UrnFunction::is_increasing() const noexcept {
  switch (variant_) {
    case UrnVariant::LinearK1:
    case UrnVariant::MajorityK:
      return p_ > 0.5;
    case UrnVariant::StepLimit:
      return false;
    case UrnVariant::KGW:
      return coupling_ > 0.0;
    case UrnVariant::Polynomial: {
      double prev = (*this)(0.0);
      for (int i = 1; i <= kGridPoints; ++i) {
        const double v = (*this)(static_cast<double>(i) / kGridPoints);
        if (!(v > prev)) return false;
        prev = v;
      }
      return true;
    }
  }
  return false;
}

std::string UrnFunction::to_string() const {
  switch (variant_) {
    case UrnVariant::LinearK1: return fmt::format("variant=linear p={}", p_);
    case UrnVariant::MajorityK: return fmt::format("variant=majority k={} p={}", k_, p_);
    case UrnVariant::StepLimit: return fmt::format("variant=step p={}", p_);
    case UrnVariant::KGW: return fmt::format("variant=kgw J={}", coupling_);
    case UrnVariant::Polynomial: return fmt::format("variant=polynomial coeffs={}", fmt::join(coeffs_, ","));
  }
  return {};
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::InvalidParameter, fmt::format("expected key=value, got '{}'", token));
    }
    auto key = token.substr(0, eq);
    if (!out.emplace(key, token.substr(eq + 1)).second) {
      throw Error(ErrorKind::InvalidParameter, fmt::format("key '{}' given twice", key));
    }
  }
  return out;
}

UrnFunction UrnFunction::parse(std::string_view text) {
  return from_keys(parse_key_values(text));
}

UrnFunction UrnFunction::from_keys(const std::map<std::string, std::string>& keys) {
  auto require = [&](const char* key) -> const std::string& {
    auto it = keys.find(key);
    if (it == keys.end()) {
      throw Error(ErrorKind::InvalidParameter, fmt::format("missing key '{}'", key));
    }
    return it->second;
  };
  auto only = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : keys) {
      bool ok = key == "variant";
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw Error(ErrorKind::InvalidParameter, fmt::format("unknown key '{}'", key));
    }
  };

  const std::string& variant = require("variant");
  if (variant == "linear") {
    only({"p"});
    return linear(parse_double("p", require("p")));
  }
  if (variant == "majority") {
    only({"k", "p"});
    return majority(parse_int("k", require("k")), parse_double("p", require("p")));
  }
  if (variant == "step") {
    only({"p"});
    return step_limit(parse_double("p", require("p")));
  }
  if (variant == "kgw") {
    only({"J"});
    return kgw(parse_double("J", require("J")));
  }
  if (variant == "polynomial") {
    only({"coeffs"});
    std::vector<double> coeffs;
    std::istringstream in(require("coeffs"));
    std::string item;
    while (std::getline(in, item, ',')) coeffs.push_back(parse_double("coeffs", item));
    return polynomial(std::move(coeffs));
  }
  throw Error(ErrorKind::InvalidParameter,
              fmt::format("key 'variant': unknown variant '{}' "
                          "(expected linear, majority, step, kgw or polynomial)",
                          variant));
}

}  // namespace erw
