#pragma once

#include <string>

#include "tbench/dataset.hpp"
#include "tbench/rng.hpp"

namespace tbench {

inline constexpr int kSyntheticClasses = 5;

/// Parameters of the built-in 5-class renderer. Each class is a distinct
/// shape with a distinct base hue, so geometric augmentation genuinely
/// matters: rotated or sheared variants are out of distribution unless the
/// pose jitters below are enabled or train-time augmentation supplies them.
struct SyntheticSpec {
  int per_class = 20;
  int side = 32;           // >= 16
  double noise_sigma = 0.05;
  int channels = 3;

  /// Rotates every class hue by this many degrees; used to build a source
  /// task that shares shapes (transferable features) but not colors.
  double hue_offset_deg = 0.0;

  /// Total hue span the five class hues are spread over. 360 gives
  /// color-separable classes; small values (e.g. 25) make color a weak cue
  /// so shape carries the class signal.
  double hue_spread_deg = 360.0;

  /// Per-image pose jitter, uniform in [-max, max] degrees. Zero keeps every
  /// render of a class identical up to noise.
  double pose_rotation_max = 0.0;
  double pose_shear_max = 0.0;

  /// Mirrors each image with probability 1/2, emulating datasets that ship
  /// with flipped duplicates baked in.
  bool random_hflip = false;

  std::string to_json() const;
  static SyntheticSpec from_json(const std::string& json_text);
};

/// Deterministic in (spec, rng stream): equal inputs give byte-identical
/// datasets. Classes are ordered lexicographically by name; per-class counts
/// are exactly spec.per_class.
Dataset generate_synthetic(const SyntheticSpec& spec, RngStream& rng);

/// generate_synthetic + save_dataset with a manifest recording spec and seed.
void generate_synthetic_to_dir(const SyntheticSpec& spec, RngStream& rng,
                               const std::filesystem::path& out_dir);

}  // namespace tbench
