#include "ihw/hw_module.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ihw/error.hpp"
#include "json.hpp"

namespace ihw {

namespace {

constexpr double kMexMeanBelow = 1e-9;
constexpr double kMexHardAbove = 1e6;

double mex(std::span<const double> v, double xi) {
  const auto n = static_cast<double>(v.size());
  if (std::abs(xi) < kMexMeanBelow) return std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (xi > kMexHardAbove) return *std::max_element(v.begin(), v.end());
  if (xi < -kMexHardAbove) return *std::min_element(v.begin(), v.end());
  // Shift by the extreme in the direction of xi so every exponent is <= 0.
  const double m = xi > 0 ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
  double acc = 0.0;
  for (double c : v) acc += std::expm1(xi * (c - m));
  return m + std::log1p(acc / n) / xi;
}

double softmax(std::span<const double> v, int order, bool raw) {
  double num = 0.0;
  double den = 0.0;
  for (double s : v) {
    if (!raw && s < 0.0) throw Error(ErrorCode::InvalidArgument, "softmax pooling expects rectified values");
    num += std::pow(s, order);
    den += std::pow(1.0 + s, order - 1);
  }
  if (std::abs(den) < 1e-300) throw Error(ErrorCode::SoftMaxDenominatorZero, "sum of (1+s)^(n-1) vanished");
  return num / den;
}

}  // namespace

std::string_view to_string(PoolingKind kind) noexcept {
  switch (kind) {
    case PoolingKind::Sum: return "sum";
    case PoolingKind::Max: return "max";
    case PoolingKind::Mean: return "mean";
    case PoolingKind::SoftMax: return "softmax";
    case PoolingKind::Mex: return "mex";
  }
  return "?";
}

PoolingKind pooling_kind_from_string(std::string_view name) {
  for (auto k : {PoolingKind::Sum, PoolingKind::Max, PoolingKind::Mean, PoolingKind::SoftMax, PoolingKind::Mex})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown pooling kind '" + std::string(name) + "'");
}

PoolingSpec PoolingSpec::softmax(int n, bool raw) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "softmax order must be >= 1");
  return {PoolingKind::SoftMax, n, 0.0, raw};
}

PoolingSpec PoolingSpec::mex(double xi) {
  if (!std::isfinite(xi)) throw Error(ErrorCode::InvalidArgument, "mex xi must be finite");
  return {PoolingKind::Mex, 1, xi, false};
}

double simple_response(const Signal& x, const Signal& t, const GroupElement& g, double b) {
  require_dims(x.dim(), t.dim(), "simple_response template");
  require_dims(x.dim(), g.dim(), "simple_response group element");
  return std::max(dot(x.values(), g.apply(t.values())) + b, 0.0);
}

double pool(std::span<const double> values, const PoolingSpec& spec) {
  if (values.empty()) throw Error(ErrorCode::EmptyPool, "nothing to pool");
  switch (spec.kind) {
    case PoolingKind::Sum: return std::accumulate(values.begin(), values.end(), 0.0);
    case PoolingKind::Max: return *std::max_element(values.begin(), values.end());
    case PoolingKind::Mean:
      return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    case PoolingKind::SoftMax:
      if (spec.order < 1) throw Error(ErrorCode::InvalidArgument, "softmax order must be >= 1");
      return softmax(values, spec.order, spec.raw);
    case PoolingKind::Mex: return mex(values, spec.xi);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown pooling kind");
}

HWLayer::HWLayer(std::vector<Signal> templates, std::vector<double> biases, FiniteGroup group, PoolingSpec pooling)
    : templates_(std::move(templates)), biases_(std::move(biases)), group_(std::move(group)), pooling_(pooling) {
  if (templates_.empty()) throw Error(ErrorCode::InvalidArgument, "layer needs at least one template");
  if (biases_.empty()) throw Error(ErrorCode::InvalidArgument, "layer needs at least one bias");
  for (const auto& t : templates_) require_dims(group_.dim(), t.dim(), "layer template");
  if (pooling_.kind == PoolingKind::SoftMax && pooling_.order < 1)
    throw Error(ErrorCode::InvalidArgument, "softmax order must be >= 1");
}

std::vector<double> layer_forward(std::span<const double> x, const HWLayer& layer) {
  require_dims(layer.input_dim(), x.size(), "layer input");
  const auto& group = layer.group();
  const bool rectify = !(layer.pooling().kind == PoolingKind::SoftMax && layer.pooling().raw);

  std::vector<double> out;
  out.reserve(layer.output_dim());
  std::vector<double> projections(group.order());
  std::vector<double> responses(group.order());
  for (const auto& t : layer.templates()) {
    for (std::size_t k = 0; k < group.order(); ++k) {
      // <x, g t> = sum_i x[g(i)] t[i]
      const auto map = group[k].map();
      double s = 0.0;
      for (std::size_t i = 0; i < t.dim(); ++i) s += x[map[i]] * t[i];
      projections[k] = s;
    }
    for (double b : layer.biases()) {
      for (std::size_t k = 0; k < group.order(); ++k) {
        const double r = projections[k] + b;
        responses[k] = rectify ? std::max(r, 0.0) : r;
      }
      out.push_back(pool(responses, layer.pooling()));
    }
  }
  return out;
}

std::vector<double> layer_forward(const Signal& x, const HWLayer& layer) { return layer_forward(x.values(), layer); }

HWNetwork::HWNetwork(std::vector<HWLayer> layers, bool renormalize_between_layers)
    : layers_(std::move(layers)), renormalize_(renormalize_between_layers) {
  if (layers_.empty()) throw Error(ErrorCode::InvalidArgument, "network needs at least one layer");
  for (std::size_t k = 1; k < layers_.size(); ++k)
    require_dims(layers_[k - 1].output_dim(), layers_[k].input_dim(), "layer " + std::to_string(k) + " input");
}

std::vector<double> network_forward(const Signal& x, const HWNetwork& net) {
  const auto& layers = net.layers();
  std::vector<double> current = layer_forward(x, layers.front());
  for (std::size_t k = 1; k < layers.size(); ++k) {
    if (net.renormalize_between_layers()) {
      if (norm2(current) < 1e-300)
        throw Error(ErrorCode::ZeroSignature, "signature of layer " + std::to_string(k - 1) + " is zero");
      current = layer_forward(Signal::normalize(current), layers[k]);
    } else {
      current = layer_forward(current, layers[k]);
    }
  }
  return current;
}

double invariance_gap(const Signal& x, const HWLayer& layer) {
  const auto base = layer_forward(x, layer);
  double gap = 0.0;
  for (const auto& g : layer.group().elements()) {
    const auto moved = layer_forward(g.apply(x), layer);
    for (std::size_t i = 0; i < base.size(); ++i) gap = std::max(gap, std::abs(moved[i] - base[i]));
  }
  return gap;
}

HWLayer layer_from_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
    const auto dim = doc.at("dim").get<std::size_t>();

    std::optional<FiniteGroup> group;
    const auto& g = doc.at("group");
    if (g.is_string()) {
      const auto name = g.get<std::string>();
      if (name == "cyclic") group = cyclic_group(dim);
      else if (name == "trivial") group = trivial_group(dim);
      else throw Error(ErrorCode::InvalidArgument, "unknown group '" + name + "'");
    } else {
      std::vector<GroupElement> elements;
      for (const auto& perm : g) elements.emplace_back(perm.get<std::vector<std::size_t>>());
      group = FiniteGroup(std::move(elements));
    }

    std::vector<Signal> templates;
    for (const auto& t : doc.at("templates")) templates.push_back(Signal::normalize(t.get<std::vector<double>>()));
    auto biases = doc.at("biases").get<std::vector<double>>();

    const auto& p = doc.at("pooling");
    PoolingSpec pooling{pooling_kind_from_string(p.at("kind").get<std::string>())};
    if (pooling.kind == PoolingKind::SoftMax) pooling = PoolingSpec::softmax(p.value("n", 1), p.value("raw", false));
    if (pooling.kind == PoolingKind::Mex) pooling = PoolingSpec::mex(p.at("xi").get<double>());

    require_dims(dim, group->dim(), "layer group");
    return HWLayer(std::move(templates), std::move(biases), std::move(*group), pooling);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("layer config: ") + e.what());
  }
}

std::string layer_to_json(const HWLayer& layer) {
  using nlohmann::json;
  json doc;
  doc["dim"] = layer.input_dim();
  const auto& group = layer.group();
  if (group.elements() == cyclic_group(group.dim()).elements()) {
    doc["group"] = "cyclic";
  } else if (group.elements() == trivial_group(group.dim()).elements()) {
    doc["group"] = "trivial";
  } else {
    json perms = json::array();
    for (const auto& g : group.elements()) perms.push_back(std::vector<std::size_t>(g.map().begin(), g.map().end()));
    doc["group"] = perms;
  }
  json templates = json::array();
  for (const auto& t : layer.templates()) templates.push_back(std::vector<double>(t.values().begin(), t.values().end()));
  doc["templates"] = templates;
  doc["biases"] = layer.biases();
  json pooling{{"kind", to_string(layer.pooling().kind)}};
  if (layer.pooling().kind == PoolingKind::SoftMax) {
    pooling["n"] = layer.pooling().order;
    pooling["raw"] = layer.pooling().raw;
  }
  if (layer.pooling().kind == PoolingKind::Mex) pooling["xi"] = layer.pooling().xi;
  doc["pooling"] = pooling;
  return doc.dump(2);
}

}  // namespace ihw
