#pragma once

// Urn functions pi: [0,1] -> [0,1] of the generalized elephant random walk.
//
// An urn holding a fraction y of black balls receives a black ball with
// probability pi(y). Mapping a +1 step to a black ball, the walk that recalls
// k past steps and follows their majority with probability p has
//
//   pi(y) = (1 - p) + (2p - 1) P_k(y),
//
// where P_k(y) is the probability that k draws with replacement contain a
// positive majority.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace erw {

/// A value in [0, 1]. Construction throws ErrorKind::Domain otherwise.
class Probability {
 public:
  explicit Probability(double value);
  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

 private:
  double value_;
};

enum class UrnVariant { LinearK1, MajorityK, StepLimit, KGW, Polynomial };

/// Probability that k i.i.d. Bernoulli(y) draws have a positive majority.
/// Throws ErrorKind::InvalidParameter for even or non-positive k.
Probability majority_prob(int k, Probability y);

/// Derivative of majority_prob in y.
double majority_prob_derivative(int k, double y);

class UrnFunction {
 public:
  static UrnFunction linear(double p);
  static UrnFunction majority(int k, double p);
  static UrnFunction step_limit(double p);
  static UrnFunction kgw(double coupling);
  static UrnFunction polynomial(std::vector<double> coeffs);

  /// Parses the flat text form, e.g. "variant=majority k=3 p=0.9".
  static UrnFunction parse(std::string_view text);
  /// Builds from already split key/value pairs; unknown keys are rejected.
  static UrnFunction from_keys(const std::map<std::string, std::string>& keys);
  std::string to_string() const;

  UrnVariant variant() const noexcept { return variant_; }
  double p() const noexcept { return p_; }
  int k() const noexcept { return k_; }
  double coupling() const noexcept { return coupling_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  /// pi(y) without range checks; y must lie in [0, 1].
  double operator()(double y) const noexcept;
  double value(Probability y) const { return (*this)(y.value()); }

  /// Analytic pi'(y). StepLimit at y = 1/2 throws NonDifferentiable.
  double derivative(double y) const;

  /// Unique y with pi(y) = q, by bisection. Throws Unsupported when pi is not
  /// strictly increasing, Domain when q is outside [pi(0), pi(1)].
  double inverse(double q) const;

  /// pi(1 - y) = 1 - pi(y) holds for this variant.
  bool is_symmetric() const noexcept;
  /// pi is strictly increasing on [0, 1].
  bool is_increasing() const noexcept;
  /// pi has a continuous derivative on [0, 1].
  bool is_smooth() const noexcept { return variant_ != UrnVariant::StepLimit; }

 private:
  UrnFunction() = default;
  void validate() const;

  UrnVariant variant_ = UrnVariant::LinearK1;
  double p_ = 0.5;
  int k_ = 1;
  double coupling_ = 0.0;
  std::vector<double> coeffs_;
};

inline double urn_value(const UrnFunction& f, Probability y) { return f.value(y); }
inline double urn_derivative(const UrnFunction& f, Probability y) { return f.derivative(y); }
inline double urn_inverse(const UrnFunction& f, Probability q) { return f.inverse(q); }

/// Splits "a=1 b=2" into a key/value map. Throws InvalidParameter on a token
/// without '=' or on a repeated key.
std::map<std::string, std::string> parse_key_values(std::string_view text);

}  // namespace erw
