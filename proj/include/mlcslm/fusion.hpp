#pragma once

// Desk-scale double-precision versions of the recognizer's trainable
// pieces: gated cross-attention fusion of semantic and speaker frames,
// the frame-stacking adapter, and LoRA weight merging.

#include <cstddef>

#include <Eigen/Dense>

namespace mlcslm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Semantic dim d_s, speaker dim d_p.
struct FusionParams {
  Mat w_q;  // d_s x d_s
  Mat w_k;  // d_p x d_s
  Mat w_v;  // d_p x d_s
  Vec w_g;  // d_s
  double b_g = 0.0;

  std::size_t semantic_dim() const { return static_cast<std::size_t>(w_q.rows()); }
  std::size_t speaker_dim() const { return static_cast<std::size_t>(w_k.rows()); }
  // Throws mlcslm::Error on inconsistent shapes or non-finite entries.
  void validate() const;
};

// Intermediate values of one forward pass.
struct FusionTrace {
  Mat attention;  // T x T', row-stochastic
  Mat attended;   // T x d_s
  Vec gates;      // T, each in (0, 1)
  Mat output;     // T x d_s
};

// F_t = S_t + g_t * softmax(S W_q (P W_k)^T / sqrt(d_s))_t (P W_v), with a
// scalar gate g_t = logistic(S_t . w_g + b_g) per semantic frame.
// S is T x d_s, P is T' x d_p.
Mat gated_fusion(const Mat& semantic, const Mat& speaker, const FusionParams& params);
FusionTrace gated_fusion_trace(const Mat& semantic, const Mat& speaker,
                               const FusionParams& params);

struct FusionGradients {
  Mat w_q, w_k, w_v;
  Vec w_g;
  double b_g = 0.0;
  Mat semantic, speaker;
};

// Reverse-mode gradients of sum(upstream .* gated_fusion(S, P, params)).
FusionGradients fusion_gradient(const Mat& semantic, const Mat& speaker,
                                const FusionParams& params, const Mat& upstream);

enum class Activation { kRelu, kGeluTanh };

// Two-layer projection applied to stacks of `stack` consecutive frames.
struct AdapterParams {
  Mat w1;  // (d_s * stack) x d_h
  Vec b1;  // d_h
  Mat w2;  // d_h x d_out
  Vec b2;  // d_out
  Activation activation = Activation::kRelu;
};

// Groups T frames into ceil(T / stack) blocks (the last zero-padded),
// flattens each block and applies affine -> activation -> affine.
Mat adapter_project(const Mat& frames, std::size_t stack, const AdapterParams& params);

struct LoraDelta {
  Mat a;  // r x d_in
  Mat b;  // d_out x r
  double alpha = 1.0;

  std::size_t rank() const { return static_cast<std::size_t>(a.rows()); }
  void validate() const;
  // (alpha / r) * B * A
  Mat update() const;
};

// W + (alpha / r) * B * A.
Mat lora_merge(const Mat& weight, const LoraDelta& delta);

}  // namespace mlcslm
