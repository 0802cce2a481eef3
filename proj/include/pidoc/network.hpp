/**
 * @file network.hpp
 * @brief Dense tanh network t -> x(t) with second-order jets and reverse-mode gradients.
 *
 * Every layer but the last is affine followed by tanh; the last is affine. A
 * jet (u, u', u'') carries the value and its first two derivatives with respect
 * to the scalar input time through the layers. The batched path stacks the
 * three slots of all grid points side by side so each layer is one matrix
 * product, and records enough of the forward pass to run the adjoint sweep that
 * differentiates any loss of the jets with respect to the weights and biases.
 */
#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pidoc/csv.hpp"
#include "pidoc/error.hpp"

namespace pidoc {

/// Layer widths [1, K1, ..., K_{L-1}, 1].
struct LayerSpec {
  std::vector<std::size_t> sizes;

  /// Network with `layers` hidden layers of `width` neurons ("layers x width").
  [[nodiscard]] static LayerSpec hidden(std::size_t layers, std::size_t width) {
    LayerSpec s;
    s.sizes.push_back(1);
    for (std::size_t i = 0; i < layers; ++i) s.sizes.push_back(width);
    s.sizes.push_back(1);
    s.validate();
    return s;
  }

  /// Accepts "6x30" (hidden layers x width) or an explicit list "1,30,30,1".
  [[nodiscard]] static LayerSpec parse(std::string_view text) {
    auto to_size = [&](std::string_view part) {
      std::size_t v = 0;
      const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
      if (res.ec != std::errc() || res.ptr != part.data() + part.size() || part.empty())
        throw InvalidArgument("layer spec: cannot parse '" + std::string(text) + "'");
      return v;
    };
    if (const auto x = text.find('x'); x != std::string_view::npos)
      return hidden(to_size(text.substr(0, x)), to_size(text.substr(x + 1)));
    LayerSpec s;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = std::min(text.find(',', start), text.size());
      s.sizes.push_back(to_size(text.substr(start, end - start)));
      start = end + 1;
    }
    s.validate();
    return s;
  }

  void validate() const {
    if (sizes.size() < 3) throw InvalidArgument("layer spec: need at least one hidden layer");
    if (sizes.front() != 1 || sizes.back() != 1) throw InvalidArgument("layer spec: input and output width must be 1");
    for (auto k : sizes)
      if (k < 1) throw InvalidArgument("layer spec: widths must be >= 1");
  }

  /// Number of affine maps (hidden layers + output layer).
  [[nodiscard]] std::size_t num_affine() const { return sizes.size() - 1; }
  [[nodiscard]] std::size_t hidden_layers() const { return sizes.size() - 2; }

  [[nodiscard]] std::size_t parameter_count() const {
    std::size_t p = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l) p += sizes[l] * sizes[l - 1] + sizes[l];
    return p;
  }

  [[nodiscard]] std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(sizes[i]);
    }
    return out;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Fixed affine map applied to t before the first layer: u = scale * t + shift.
struct InputScaling {
  double scale = 1.0;
  double shift = 0.0;

  /// Maps [lo, hi] onto [-1, 1].
  [[nodiscard]] static InputScaling unit_interval(double lo, double hi) {
    return {2.0 / (hi - lo), -(hi + lo) / (hi - lo)};
  }

  friend bool operator==(const InputScaling&, const InputScaling&) = default;
};

/**
 * Weights and biases stored as one flat vector.
 *
 * Layout per affine map l (1-based, l = 1..L): w_l column-major with shape
 * (K_l x K_{l-1}), followed by b_l of length K_l.
 */
class NetworkParams {
 public:
  NetworkParams() = default;

  explicit NetworkParams(LayerSpec spec, InputScaling scaling = {})
      : spec_(std::move(spec)), scaling_(scaling) {
    spec_.validate();
    flat_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec_.parameter_count()));
    offsets_.reserve(spec_.num_affine());
    std::size_t off = 0;
    for (std::size_t l = 1; l < spec_.sizes.size(); ++l) {
      offsets_.push_back(off);
      off += spec_.sizes[l] * spec_.sizes[l - 1] + spec_.sizes[l];
    }
  }

  [[nodiscard]] static NetworkParams unflatten(LayerSpec spec, const Eigen::VectorXd& flat, InputScaling scaling = {}) {
    NetworkParams p(std::move(spec), scaling);
    p.set_flat(flat);
    return p;
  }

  [[nodiscard]] const LayerSpec& spec() const { return spec_; }
  [[nodiscard]] const InputScaling& scaling() const { return scaling_; }
  [[nodiscard]] const Eigen::VectorXd& flat() const { return flat_; }
  [[nodiscard]] Eigen::VectorXd& flat() { return flat_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(flat_.size()); }

  void set_flat(const Eigen::VectorXd& v) {
    if (v.size() != flat_.size()) throw LengthMismatch("NetworkParams::set_flat", v.size(), flat_.size());
    flat_ = v;
  }

  /// Weight matrix of affine map `layer` (0-based: 0 is the first hidden layer).
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const {
    return {flat_.data() + offsets_[layer], rows(layer), cols(layer)};
  }
  [[nodiscard]] Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer) {
    return {flat_.data() + offsets_[layer], rows(layer), cols(layer)};
  }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const {
    return {flat_.data() + offsets_[layer] + rows(layer) * cols(layer), rows(layer)};
  }
  [[nodiscard]] Eigen::Map<Eigen::VectorXd> bias(std::size_t layer) {
    return {flat_.data() + offsets_[layer] + rows(layer) * cols(layer), rows(layer)};
  }

  [[nodiscard]] std::size_t offset(std::size_t layer) const { return offsets_[layer]; }

 private:
  [[nodiscard]] Eigen::Index rows(std::size_t layer) const { return static_cast<Eigen::Index>(spec_.sizes[layer + 1]); }
  [[nodiscard]] Eigen::Index cols(std::size_t layer) const { return static_cast<Eigen::Index>(spec_.sizes[layer]); }

  LayerSpec spec_;
  InputScaling scaling_;
  Eigen::VectorXd flat_;
  std::vector<std::size_t> offsets_;
};

/// Glorot-normal weights (variance 2 / (fan_in + fan_out)), zero biases.
[[nodiscard]] inline NetworkParams init_params(const LayerSpec& spec, std::uint64_t seed, InputScaling scaling = {}) {
  NetworkParams p(spec, scaling);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < spec.num_affine(); ++l) {
    const double fan_in = static_cast<double>(spec.sizes[l]);
    const double fan_out = static_cast<double>(spec.sizes[l + 1]);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (fan_in + fan_out)));
    auto w = p.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    p.bias(l).setZero();
  }
  return p;
}

/// Value and first two time derivatives of a scalar signal.
struct Jet2 {
  double val = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

namespace detail {

// Shared by forward() and forward_jet() so both produce bit-identical values.
template <class Weights, class Input>
inline double affine_row(const Weights& w, Eigen::Index row, const Input& in, double bias) {
  double z = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) z += w(row, j) * in[static_cast<std::size_t>(j)];
  return z + bias;
}

/// Vectorizable tanh through exp; absolute error stays within a few ulp of 1.
template <class Derived>
inline auto tanh_array(const Eigen::ArrayBase<Derived>& z) {
  return 1.0 - 2.0 / ((2.0 * z).exp() + 1.0);
}

}  // namespace detail

/// Network output at a single time.
[[nodiscard]] inline double forward(const NetworkParams& p, double t) {
  std::vector<double> h{p.scaling().scale * t + p.scaling().shift};
  std::vector<double> next;
  const std::size_t layers = p.spec().num_affine();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto w = p.weight(l);
    const auto b = p.bias(l);
    next.assign(static_cast<std::size_t>(w.rows()), 0.0);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const double z = detail::affine_row(w, i, h, b[i]);
      next[static_cast<std::size_t>(i)] = (l + 1 < layers) ? std::tanh(z) : z;
    }
    h.swap(next);
  }
  return h[0];
}

/// Network output and its first two derivatives with respect to t.
[[nodiscard]] inline Jet2 forward_jet(const NetworkParams& p, double t) {
  std::vector<double> h0{p.scaling().scale * t + p.scaling().shift};
  std::vector<double> h1{p.scaling().scale};
  std::vector<double> h2{0.0};
  std::vector<double> n0, n1, n2;
  const std::size_t layers = p.spec().num_affine();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto w = p.weight(l);
    const auto b = p.bias(l);
    const auto rows = static_cast<std::size_t>(w.rows());
    n0.assign(rows, 0.0);
    n1.assign(rows, 0.0);
    n2.assign(rows, 0.0);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double z0 = detail::affine_row(w, i, h0, b[i]);
      const double z1 = detail::affine_row(w, i, h1, 0.0);
      const double z2 = detail::affine_row(w, i, h2, 0.0);
      if (l + 1 < layers) {
        const double s = std::tanh(z0);
        const double g = 1.0 - s * s;
        n0[k] = s;
        n1[k] = g * z1;
        n2[k] = g * z2 - 2.0 * s * g * z1 * z1;
      } else {
        n0[k] = z0;
        n1[k] = z1;
        n2[k] = z2;
      }
    }
    h0.swap(n0);
    h1.swap(n1);
    h2.swap(n2);
  }
  return {h0[0], h1[0], h2[0]};
}

/// Jets of the network output over a grid of times.
struct JetBatch {
  Eigen::ArrayXd val;
  Eigen::ArrayXd d1;
  Eigen::ArrayXd d2;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(val.size()); }
};

/// Sensitivities of a scalar loss to each slot of each output jet.
struct JetAdjoint {
  Eigen::ArrayXd val;
  Eigen::ArrayXd d1;
  Eigen::ArrayXd d2;

  [[nodiscard]] static JetAdjoint zeros(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    return {Eigen::ArrayXd::Zero(m), Eigen::ArrayXd::Zero(m), Eigen::ArrayXd::Zero(m)};
  }
};

/**
 * Recorded batched forward pass.
 *
 * Activations are stored as K x 3N matrices with column blocks [value | d/dt | d2/dt2].
 * inputs[l] feeds affine map l; pre[l] is the affine output of hidden layer l.
 */
struct JetTape {
  Eigen::Index n = 0;
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre;
  JetBatch out;
};

[[nodiscard]] inline JetTape forward_jets(const NetworkParams& p, std::span<const double> t) {
  JetTape tape;
  const auto n = static_cast<Eigen::Index>(t.size());
  tape.n = n;
  const std::size_t layers = p.spec().num_affine();
  tape.inputs.resize(layers);
  tape.pre.resize(layers - 1);

  Eigen::MatrixXd& in0 = tape.inputs[0];
  in0.resize(1, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    in0(0, i) = p.scaling().scale * t[static_cast<std::size_t>(i)] + p.scaling().shift;
    in0(0, n + i) = p.scaling().scale;
    in0(0, 2 * n + i) = 0.0;
  }

  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Eigen::MatrixXd& z = tape.pre[l];
    z.noalias() = p.weight(l) * tape.inputs[l];
    z.leftCols(n).colwise() += p.bias(l);

    Eigen::MatrixXd& h = tape.inputs[l + 1];
    h.resize(z.rows(), 3 * n);
    auto s = h.leftCols(n).array();
    s = detail::tanh_array(z.leftCols(n).array());
    const Eigen::ArrayXXd g = 1.0 - s.square();
    const auto z1 = z.middleCols(n, n).array();
    const auto z2 = z.rightCols(n).array();
    h.middleCols(n, n).array() = g * z1;
    h.rightCols(n).array() = g * z2 - 2.0 * s * g * z1.square();
  }

  const Eigen::MatrixXd y = p.weight(layers - 1) * tape.inputs[layers - 1];
  const double b = p.bias(layers - 1)[0];
  tape.out.val = y.row(0).leftCols(n).transpose().array() + b;
  tape.out.d1 = y.row(0).middleCols(n, n).transpose().array();
  tape.out.d2 = y.row(0).rightCols(n).transpose().array();
  return tape;
}

/// Gradient of a loss with respect to the flat parameters, given its jet adjoints.
[[nodiscard]] inline Eigen::VectorXd backward_jets(const NetworkParams& p, const JetTape& tape, const JetAdjoint& adj) {
  const Eigen::Index n = tape.n;
  if (adj.val.size() != n || adj.d1.size() != n || adj.d2.size() != n)
    throw LengthMismatch("backward_jets", static_cast<std::size_t>(adj.val.size()), static_cast<std::size_t>(n));
  const std::size_t layers = p.spec().num_affine();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size()));

  auto grad_w = [&](std::size_t l) {
    const auto rows = static_cast<Eigen::Index>(p.spec().sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(p.spec().sizes[l]);
    return Eigen::Map<Eigen::MatrixXd>(grad.data() + p.offset(l), rows, cols);
  };
  auto grad_b = [&](std::size_t l) {
    const auto rows = static_cast<Eigen::Index>(p.spec().sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(p.spec().sizes[l]);
    return Eigen::Map<Eigen::VectorXd>(grad.data() + p.offset(l) + rows * cols, rows);
  };

  // Adjoint of the output layer's affine result, stacked the same way as activations.
  Eigen::MatrixXd upstream(1, 3 * n);
  upstream.row(0).leftCols(n) = adj.val.matrix().transpose();
  upstream.row(0).middleCols(n, n) = adj.d1.matrix().transpose();
  upstream.row(0).rightCols(n) = adj.d2.matrix().transpose();

  for (std::size_t l = layers; l-- > 0;) {
    grad_w(l).noalias() = upstream * tape.inputs[l].transpose();
    grad_b(l) = upstream.leftCols(n).rowwise().sum();
    if (l == 0) break;

    // Adjoint of the previous layer's tanh output.
    const Eigen::MatrixXd h_adj = p.weight(l).transpose() * upstream;

    const std::size_t k = l - 1;
    const auto s = tape.inputs[l].leftCols(n).array();
    const auto z1 = tape.pre[k].middleCols(n, n).array();
    const auto z2 = tape.pre[k].rightCols(n).array();
    const auto a0 = h_adj.leftCols(n).array();
    const auto a1 = h_adj.middleCols(n, n).array();
    const auto a2 = h_adj.rightCols(n).array();
    const Eigen::ArrayXXd g = 1.0 - s.square();
    const Eigen::ArrayXXd sg = s * g;

    upstream.resize(h_adj.rows(), 3 * n);
    upstream.leftCols(n).array() =
        a0 * g - 2.0 * a1 * sg * z1 - 2.0 * a2 * (sg * z2 + z1.square() * g * (1.0 - 3.0 * s.square()));
    upstream.middleCols(n, n).array() = a1 * g - 4.0 * a2 * sg * z1;
    upstream.rightCols(n).array() = a2 * g;
  }
  return grad;
}

struct LossAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/**
 * Evaluates `loss_fn(jets, adjoint)` on the grid and differentiates it with
 * respect to the flat parameter vector. The loss function fills `adjoint` with
 * dL/d(val, d1, d2) per grid point and returns L.
 */
template <class LossFn>
[[nodiscard]] LossAndGradient loss_gradient(const NetworkParams& p, std::span<const double> t, LossFn&& loss_fn) {
  const JetTape tape = forward_jets(p, t);
  JetAdjoint adj = JetAdjoint::zeros(t.size());
  const double value = loss_fn(static_cast<const JetBatch&>(tape.out), adj);
  return {value, backward_jets(p, tape, adj)};
}

/// Checkpoint format: header lines, then one parameter per line.
inline void write_params(std::ostream& os, const NetworkParams& p) {
  os << "pidoc-params 1\n";
  os << "layers";
  for (auto k : p.spec().sizes) os << ' ' << k;
  os << '\n';
  os << "input_scaling " << format_number(p.scaling().scale) << ' ' << format_number(p.scaling().shift) << '\n';
  os << "count " << p.size() << '\n';
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) os << format_number(p.flat()[i]) << '\n';
}

[[nodiscard]] inline NetworkParams read_params(std::istream& is) {
  std::string line;
  auto expect = [&](std::string_view key) {
    if (!std::getline(is, line) || line.rfind(key, 0) != 0)
      throw Error("params: expected '" + std::string(key) + "' line");
    return std::istringstream(line.substr(key.size()));
  };
  {
    auto ss = expect("pidoc-params");
    int version = 0;
    ss >> version;
    if (version != 1) throw Error("params: unsupported version");
  }
  LayerSpec spec;
  {
    auto ss = expect("layers");
    std::size_t k = 0;
    while (ss >> k) spec.sizes.push_back(k);
    spec.validate();
  }
  InputScaling scaling;
  {
    auto ss = expect("input_scaling");
    std::string a, b;
    ss >> a >> b;
    scaling = {parse_number(a), parse_number(b)};
  }
  std::size_t count = 0;
  {
    auto ss = expect("count");
    ss >> count;
  }
  NetworkParams p(spec, scaling);
  if (count != p.size()) throw LengthMismatch("params: count", count, p.size());
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw Error("params: truncated parameter list");
    p.flat()[static_cast<Eigen::Index>(i)] = parse_number(line);
  }
  return p;
}

}  // namespace pidoc
