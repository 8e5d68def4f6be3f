#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tbench/dataset.hpp"
#include "tbench/image.hpp"
#include "tbench/rng.hpp"

namespace tbench {

/// The four named parameter layers of the toy classifier, ordered from
/// input to output. Freezing sweeps unfreeze from the back of this list.
enum class LayerName { conv1, conv2, dense1, head };

inline constexpr std::array<LayerName, 4> kLayerOrder = {
    LayerName::conv1, LayerName::conv2, LayerName::dense1, LayerName::head};

const char* to_string(LayerName n);
LayerName layer_name_from_string(const std::string& s);

/// conv1(3x3) -> relu -> maxpool2 -> conv2(3x3) -> relu -> maxpool2 ->
/// flatten -> dense1 -> relu -> head. Convolutions are stride-1 with zero
/// padding, so spatial size only changes at the pools.
struct Architecture {
  int input_side = 32;     // divisible by 4
  int input_channels = 3;  // 1 or 3
  int conv1_channels = 8;
  int conv2_channels = 16;
  int dense1_units = 32;
  int num_classes = 5;

  void validate() const;
  int pool1_side() const { return input_side / 2; }
  int pool2_side() const { return input_side / 4; }
  int flatten_dim() const { return pool2_side() * pool2_side() * conv2_channels; }
  std::uint64_t hash() const;
  bool operator==(const Architecture&) const = default;
};

struct LayerParams {
  std::vector<double> weight;
  std::vector<double> bias;
};

/// Parameter snapshot. Value-semantic: training steps produce new snapshots
/// rather than mutating shared state.
struct ModelParams {
  Architecture arch;
  LayerParams conv1, conv2, dense1, head;

  LayerParams& layer(LayerName n);
  const LayerParams& layer(LayerName n) const;
};

/// Same layout as ModelParams; holds d(loss)/d(parameter).
using Gradients = ModelParams;

/// Per-layer trainability flags. true = the optimizer may update the layer.
struct FreezeMask {
  bool conv1 = true, conv2 = true, dense1 = true, head = true;

  bool trainable(LayerName n) const;
  void set_trainable(LayerName n, bool value);
  static FreezeMask all_trainable() { return {}; }
  static FreezeMask all_frozen() { return {false, false, false, false}; }
  /// Comma-separated trainable layer names, or "none".
  std::string describe() const;
  bool operator==(const FreezeMask&) const = default;
};

enum class HeadKind { softmax_cross_entropy, linear_svm_hinge };
const char* to_string(HeadKind k);
HeadKind head_kind_from_string(const std::string& s);

struct Batch {
  std::vector<const Image*> images;
  std::vector<int> labels;
  std::size_t size() const { return images.size(); }
};

/// Kaiming-uniform fan-in init (bound sqrt(6/fan_in)) for weights, zero
/// biases. Deterministic per stream.
ModelParams init_model(const Architecture& arch, RngStream& rng);

/// Gradients sized and zeroed to match.
Gradients zero_gradients(const Architecture& arch);

struct ForwardCache {
  int batch = 0;
  std::vector<double> input;      // B x Cin x H x W
  std::vector<double> conv1_pre;  // B x C1 x H x W (pre-relu)
  std::vector<double> pool1_out;  // B x C1 x H/2 x W/2 (post relu+pool)
  std::vector<int> pool1_arg;     // argmax source offset within conv1_pre
  std::vector<double> conv2_pre;
  std::vector<double> pool2_out;
  std::vector<int> pool2_arg;
  std::vector<double> dense1_pre;  // B x D1
  std::vector<double> logits;      // B x C
};

/// Logits, row-major B x num_classes. Pure: same params + batch give the
/// same bits.
std::vector<double> forward(const ModelParams& params, const Batch& batch);
ForwardCache forward_cached(const ModelParams& params, const Batch& batch);

struct HeadLoss {
  double loss = 0.0;
  std::vector<double> dlogits;  // B x C, already divided by batch size
};

/// softmax_cross_entropy: mean -log softmax[label]; gradient (p - onehot)/B.
/// linear_svm_hinge: Weston-Watkins multiclass hinge, mean over the batch;
/// a margin at exactly zero contributes nothing to the subgradient.
HeadLoss head_loss(HeadKind kind, const std::vector<double>& logits,
                   const std::vector<int>& labels, int num_classes);

/// Backprop through the whole stack. Gradients are produced for every layer;
/// freezing is applied separately by apply_freeze.
Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const std::vector<double>& dlogits);

/// Zeroes gradients of layers the mask marks non-trainable.
void apply_freeze(Gradients& grads, const FreezeMask& mask);

/// Copies the trained trunk and re-initializes only the head for a new
/// class count (conv1/conv2/dense1 bit-identical to the input).
ModelParams reinit_head(const ModelParams& trained, int target_classes,
                        RngStream& rng);

}  // namespace tbench
