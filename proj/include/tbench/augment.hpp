#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tbench/dataset.hpp"
#include "tbench/image.hpp"
#include "tbench/rng.hpp"

namespace tbench {

/// Ranges for the five train-time augmentation families. A draw is uniform
/// over the symmetric interval (angles/shear in degrees), zoom over
/// [1-z, 1+z], brightness over [1-b, 1+b].
struct AugmentSpec {
  bool horizontal_flip = false;
  bool vertical_flip = false;
  double rotation_range = 0.0;    // degrees >= 0
  double shear_range = 0.0;       // degrees in [0, 90)
  double zoom_range = 0.0;        // fraction >= 0
  double brightness_range = 0.0;  // fraction >= 0

  bool enabled() const;
  void validate() const;
  std::string to_json() const;
  static AugmentSpec from_json(const std::string& json_text);
};

/// One reified draw from an AugmentSpec; fully determines the transform.
struct TransformParams {
  bool flip_h = false;
  bool flip_v = false;
  double angle = 0.0;       // degrees
  double shear = 0.0;       // degrees
  double scale = 1.0;       // clamped to [0.05, 2]
  double brightness = 1.0;  // clamped to >= 0

  bool is_identity() const;
};

/// Fixed draw layout: six values are always consumed per call, so the
/// stream position does not depend on which families are enabled.
TransformParams sample_params(const AugmentSpec& spec, RngStream& rng);

/// 2x3 affine in centered pixel coordinates: dest = linear * src + translate.
struct AffineMatrix {
  // [ a b tx ]
  // [ c d ty ]
  double a = 1, b = 0, tx = 0;
  double c = 0, d = 1, ty = 0;
};

/// rotation(angle) ∘ shear(shear) ∘ uniform scale. Right-angle rotations
/// with shear=0, scale=1 produce exact 0/±1 entries so warp_affine can take
/// its lossless permutation path.
AffineMatrix make_affine(double angle_deg, double shear_deg, double scale);

/// Inverse-mapped warp about the image center with bilinear interpolation;
/// out-of-bounds source coordinates clamp to the nearest edge pixel. Output
/// dimensions equal input dimensions. Signed-permutation matrices (identity,
/// flips, 180°, and 90°/270° on square images) are applied as exact index
/// permutations, with no interpolation error.
Image warp_affine(const Image& image, const AffineMatrix& m);

Image flip_horizontal(const Image& image);
Image flip_vertical(const Image& image);

/// flips -> one combined affine -> brightness multiply (clamped to [0,1]).
Image apply_transform(const Image& image, const TransformParams& params);

/// One fresh parameter draw per sample. Train-time only; validation and test
/// batches never pass through here.
std::vector<Image> augment_batch(const Dataset& dataset,
                                 std::span<const std::size_t> indices,
                                 const AugmentSpec& spec, RngStream& rng);

}  // namespace tbench
