#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ihw/signal_group.hpp"

namespace ihw {

enum class PoolingKind { Sum, Max, Mean, SoftMax, Mex };

std::string_view to_string(PoolingKind kind) noexcept;
PoolingKind pooling_kind_from_string(std::string_view name);

struct PoolingSpec {
  PoolingKind kind = PoolingKind::Sum;
  int order = 1;        // SoftMax exponent n >= 1
  double xi = 0.0;      // Mex temperature; any finite value
  bool raw = false;     // SoftMax on un-rectified dot products (no correctness claims)

  static PoolingSpec sum() { return {PoolingKind::Sum}; }
  static PoolingSpec max() { return {PoolingKind::Max}; }
  static PoolingSpec mean() { return {PoolingKind::Mean}; }
  static PoolingSpec softmax(int n, bool raw = false);
  static PoolingSpec mex(double xi);
};

/// max(<x, g t> + b, 0)
double simple_response(const Signal& x, const Signal& t, const GroupElement& g, double b);

/// Aggregates one pooling range.
///   Sum, Max, Mean: as named.
///   SoftMax(n):     sum_i s_i^n / sum_j (1 + s_j)^(n-1)
///   Mex(xi):        (1/xi) log(mean_i exp(xi s_i)), max-shifted; |xi| < 1e-9 is the
///                   mean and |xi| > 1e6 is the exact max (xi > 0) or min (xi < 0).
double pool(std::span<const double> values, const PoolingSpec& spec);

class HWLayer {
 public:
  HWLayer(std::vector<Signal> templates, std::vector<double> biases, FiniteGroup group, PoolingSpec pooling);

  std::size_t input_dim() const noexcept { return group_.dim(); }
  std::size_t output_dim() const noexcept { return templates_.size() * biases_.size(); }

  const std::vector<Signal>& templates() const noexcept { return templates_; }
  const std::vector<double>& biases() const noexcept { return biases_; }
  const FiniteGroup& group() const noexcept { return group_; }
  const PoolingSpec& pooling() const noexcept { return pooling_; }

 private:
  std::vector<Signal> templates_;
  std::vector<double> biases_;
  FiniteGroup group_;
  PoolingSpec pooling_;
};

/// Signature of x: one pooled value per (template, bias), template-major.
std::vector<double> layer_forward(std::span<const double> x, const HWLayer& layer);
std::vector<double> layer_forward(const Signal& x, const HWLayer& layer);

class HWNetwork {
 public:
  explicit HWNetwork(std::vector<HWLayer> layers, bool renormalize_between_layers = true);

  const std::vector<HWLayer>& layers() const noexcept { return layers_; }
  bool renormalize_between_layers() const noexcept { return renormalize_; }

 private:
  std::vector<HWLayer> layers_;
  bool renormalize_;
};

/// Throws ZeroSignature when an intermediate signature is zero and cannot be
/// renormalized. The last layer's signature is returned raw.
std::vector<double> network_forward(const Signal& x, const HWNetwork& net);

/// max over g in the layer's group of || sig(g x) - sig(x) ||_inf
double invariance_gap(const Signal& x, const HWLayer& layer);

// JSON layer configuration:
//   {"dim": d, "group": "cyclic" | "trivial", "templates": [[...], ...],
//    "biases": [...], "pooling": {"kind": "sum"|"max"|"mean"|"softmax"|"mex",
//    "n": int, "xi": real, "raw": bool}}
// Templates are normalized on load.
HWLayer layer_from_json(std::string_view text);
std::string layer_to_json(const HWLayer& layer);

}  // namespace ihw
