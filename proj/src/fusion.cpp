#include "mlcslm/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlcslm/error.hpp"

namespace mlcslm {

namespace {

// Kept strictly inside (0, 1): saturated inputs map to the nearest
// representable interior values instead of rounding to 0 or 1.
double logistic(double z) {
  static const double lo = std::numeric_limits<double>::denorm_min();
  static const double hi = std::nextafter(1.0, 0.0);
  double g;
  if (z >= 0) {
    g = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    g = e / (1.0 + e);
  }
  return std::clamp(g, lo, hi);
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw Error(std::string("non-finite values in ") + what);
}

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_inputs(const Mat& s, const Mat& p, const FusionParams& params) {
  params.validate();
  if (s.rows() < 1 || p.rows() < 1) throw Error("fusion needs at least one frame per stream");
  if (s.cols() != params.w_q.rows())
    throw Error("semantic frames are " + shape(s) + ", W_q is " + shape(params.w_q));
  if (p.cols() != params.w_k.rows())
    throw Error("speaker frames are " + shape(p) + ", W_k is " + shape(params.w_k));
  require_finite(s, "semantic frames");
  require_finite(p, "speaker frames");
}

Mat row_softmax(const Mat& z) {
  Mat out(z.rows(), z.cols());
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    const double mx = z.row(t).maxCoeff();
    out.row(t) = (z.row(t).array() - mx).exp().matrix();
    out.row(t) /= out.row(t).sum();
  }
  return out;
}

double activate(double x, Activation a) {
  switch (a) {
    case Activation::kRelu: return x > 0 ? x : 0.0;
    case Activation::kGeluTanh: {
      constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
      return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
    }
  }
  return x;
}

}  // namespace

void FusionParams::validate() const {
  const auto ds = w_q.rows();
  if (ds < 1 || w_q.cols() != ds) throw Error("W_q must be square d_s x d_s, got " + shape(w_q));
  if (w_k.rows() < 1 || w_k.cols() != ds) throw Error("W_k must be d_p x d_s, got " + shape(w_k));
  if (w_v.rows() != w_k.rows() || w_v.cols() != ds)
    throw Error("W_v must be d_p x d_s, got " + shape(w_v));
  if (w_g.size() != ds) throw Error("w_g must have d_s entries");
  require_finite(w_q, "W_q");
  require_finite(w_k, "W_k");
  require_finite(w_v, "W_v");
  require_finite(w_g, "w_g");
  if (!std::isfinite(b_g)) throw Error("non-finite b_g");
}

FusionTrace gated_fusion_trace(const Mat& s, const Mat& p, const FusionParams& params) {
  check_inputs(s, p, params);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.semantic_dim()));
  const Mat q = s * params.w_q;
  const Mat k = p * params.w_k;
  const Mat v = p * params.w_v;
  FusionTrace tr;
  tr.attention = row_softmax(q * k.transpose() * scale);
  tr.attended = tr.attention * v;
  const Vec z = (s * params.w_g).array() + params.b_g;
  tr.gates = z.unaryExpr(&logistic);
  tr.output = s + tr.gates.asDiagonal() * tr.attended;
  return tr;
}

Mat gated_fusion(const Mat& s, const Mat& p, const FusionParams& params) {
  return gated_fusion_trace(s, p, params).output;
}

FusionGradients fusion_gradient(const Mat& s, const Mat& p, const FusionParams& params,
                                const Mat& upstream) {
  const FusionTrace tr = gated_fusion_trace(s, p, params);
  if (upstream.rows() != tr.output.rows() || upstream.cols() != tr.output.cols())
    throw Error("upstream cotangent is " + shape(upstream) + ", output is " + shape(tr.output));
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.semantic_dim()));
  const Mat q = s * params.w_q;
  const Mat k = p * params.w_k;
  const Mat v = p * params.w_v;
  const Mat& a = tr.attention;

  FusionGradients g;
  g.semantic = upstream;

  // Gate branch.
  const Mat d_attended = tr.gates.asDiagonal() * upstream;
  const Vec d_gate = (upstream.array() * tr.attended.array()).rowwise().sum();
  const Vec d_gate_pre =
      (d_gate.array() * tr.gates.array() * (1.0 - tr.gates.array())).matrix();
  g.w_g = s.transpose() * d_gate_pre;
  g.b_g = d_gate_pre.sum();
  g.semantic += d_gate_pre * params.w_g.transpose();

  // Attention branch.
  const Mat d_a = d_attended * v.transpose();
  const Mat d_v = a.transpose() * d_attended;
  const Vec row_dot = (d_a.array() * a.array()).rowwise().sum();
  const Mat d_scores = (a.array() * (d_a.colwise() - row_dot).array()).matrix();
  const Mat d_q = d_scores * k * scale;
  const Mat d_k = d_scores.transpose() * q * scale;

  g.w_q = s.transpose() * d_q;
  g.semantic += d_q * params.w_q.transpose();
  g.w_k = p.transpose() * d_k;
  g.w_v = p.transpose() * d_v;
  g.speaker = d_k * params.w_k.transpose() + d_v * params.w_v.transpose();
  return g;
}

Mat adapter_project(const Mat& frames, std::size_t stack, const AdapterParams& params) {
  if (stack < 1) throw Error("stack must be >= 1");
  const auto ds = frames.cols();
  const auto in_dim = ds * static_cast<Eigen::Index>(stack);
  if (params.w1.rows() != in_dim)
    throw Error("adapter W1 is " + shape(params.w1) + ", expected " +
                std::to_string(in_dim) + " input rows");
  if (params.b1.size() != params.w1.cols() || params.w2.rows() != params.w1.cols() ||
      params.b2.size() != params.w2.cols())
    throw Error("inconsistent adapter parameter shapes");
  require_finite(frames, "adapter input");

  const auto t = frames.rows();
  const auto st = static_cast<Eigen::Index>(stack);
  const auto blocks = (t + st - 1) / st;
  Mat stacked = Mat::Zero(blocks, in_dim);
  for (Eigen::Index r = 0; r < t; ++r)
    stacked.block(r / st, (r % st) * ds, 1, ds) = frames.row(r);
  Mat hidden = (stacked * params.w1).rowwise() + params.b1.transpose();
  hidden = hidden.unaryExpr([&](double x) { return activate(x, params.activation); });
  return (hidden * params.w2).rowwise() + params.b2.transpose();
}

void LoraDelta::validate() const {
  const auto r = a.rows();
  if (r < 1) throw Error("LoRA rank must be positive");
  if (b.cols() != r) throw Error("LoRA B is " + shape(b) + ", A is " + shape(a));
  if (r > a.cols() || r > b.rows()) throw Error("LoRA rank exceeds matrix dimension");
  require_finite(a, "LoRA A");
  require_finite(b, "LoRA B");
  if (!std::isfinite(alpha)) throw Error("non-finite LoRA alpha");
}

Mat LoraDelta::update() const {
  validate();
  return (alpha / static_cast<double>(rank())) * (b * a);
}

Mat lora_merge(const Mat& weight, const LoraDelta& delta) {
  delta.validate();
  if (weight.rows() != delta.b.rows() || weight.cols() != delta.a.cols())
    throw Error("LoRA update " + std::to_string(delta.b.rows()) + "x" +
                std::to_string(delta.a.cols()) + " does not match weight " + shape(weight));
  return weight + delta.update();
}

}  // namespace mlcslm
