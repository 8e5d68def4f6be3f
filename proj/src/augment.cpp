#include "tbench/augment.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tbench/error.hpp"

namespace tbench {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kScaleMin = 0.05;  // zoom 100% would otherwise reach scale 0
constexpr double kScaleMax = 2.0;

double lerp(double a, double b, double t) { return a + t * (b - a); }

bool is_int(double v) { return v == std::floor(v); }

// Signed permutation check: entries exactly in {0, ±1}, one nonzero per
// row/column, integer translation. These are the lossless warp cases.
bool is_signed_permutation(const AffineMatrix& m) {
  auto unit = [](double v) { return v == 0.0 || v == 1.0 || v == -1.0; };
  if (!unit(m.a) || !unit(m.b) || !unit(m.c) || !unit(m.d)) return false;
  if (!is_int(m.tx) || !is_int(m.ty)) return false;
  bool row0 = (m.a != 0.0) != (m.b != 0.0);
  bool row1 = (m.c != 0.0) != (m.d != 0.0);
  bool col0 = (m.a != 0.0) != (m.c != 0.0);
  bool col1 = (m.b != 0.0) != (m.d != 0.0);
  return row0 && row1 && col0 && col1;
}

}  // namespace

bool AugmentSpec::enabled() const {
  return horizontal_flip || vertical_flip || rotation_range > 0.0 ||
         shear_range > 0.0 || zoom_range > 0.0 || brightness_range > 0.0;
}

void AugmentSpec::validate() const {
  if (rotation_range < 0 || shear_range < 0 || zoom_range < 0 || brightness_range < 0)
    throw ConfigError("augment: ranges must be >= 0");
  if (shear_range >= 90.0)
    throw ConfigError("augment: shear_range must be < 90 degrees");
}

std::string AugmentSpec::to_json() const {
  nlohmann::json j;
  j["horizontal_flip"] = horizontal_flip;
  j["vertical_flip"] = vertical_flip;
  j["rotation_range"] = rotation_range;
  j["shear_range"] = shear_range;
  j["zoom_range"] = zoom_range;
  j["brightness_range"] = brightness_range;
  return j.dump();
}

AugmentSpec AugmentSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AugmentSpec s;
  s.horizontal_flip = j.at("horizontal_flip").get<bool>();
  s.vertical_flip = j.at("vertical_flip").get<bool>();
  s.rotation_range = j.at("rotation_range").get<double>();
  s.shear_range = j.at("shear_range").get<double>();
  s.zoom_range = j.at("zoom_range").get<double>();
  s.brightness_range = j.at("brightness_range").get<double>();
  s.validate();
  return s;
}

bool TransformParams::is_identity() const {
  return !flip_h && !flip_v && angle == 0.0 && shear == 0.0 && scale == 1.0 &&
         brightness == 1.0;
}

TransformParams sample_params(const AugmentSpec& spec, RngStream& rng) {
  spec.validate();
  double u_fh = rng.uniform();
  double u_fv = rng.uniform();
  double u_angle = rng.uniform();
  double u_shear = rng.uniform();
  double u_zoom = rng.uniform();
  double u_bright = rng.uniform();

  TransformParams p;
  p.flip_h = spec.horizontal_flip && u_fh < 0.5;
  p.flip_v = spec.vertical_flip && u_fv < 0.5;
  p.angle = spec.rotation_range == 0.0
                ? 0.0
                : lerp(-spec.rotation_range, spec.rotation_range, u_angle);
  p.shear = spec.shear_range == 0.0
                ? 0.0
                : lerp(-spec.shear_range, spec.shear_range, u_shear);
  p.scale = spec.zoom_range == 0.0
                ? 1.0
                : std::clamp(lerp(1.0 - spec.zoom_range, 1.0 + spec.zoom_range, u_zoom),
                             kScaleMin, kScaleMax);
  p.brightness = spec.brightness_range == 0.0
                     ? 1.0
                     : std::max(lerp(1.0 - spec.brightness_range,
                                     1.0 + spec.brightness_range, u_bright),
                                0.0);
  return p;
}

AffineMatrix make_affine(double angle_deg, double shear_deg, double scale) {
  double ct, st;
  double norm = angle_deg - 360.0 * std::floor(angle_deg / 360.0);
  if (norm == 0.0) { ct = 1.0; st = 0.0; }
  else if (norm == 90.0) { ct = 0.0; st = 1.0; }
  else if (norm == 180.0) { ct = -1.0; st = 0.0; }
  else if (norm == 270.0) { ct = 0.0; st = -1.0; }
  else {
    ct = std::cos(angle_deg * kPi / 180.0);
    st = std::sin(angle_deg * kPi / 180.0);
  }
  double tsh = shear_deg == 0.0 ? 0.0 : std::tan(shear_deg * kPi / 180.0);

  // R * SH * SC with SH = [1 tan; 0 1], SC = s*I.
  AffineMatrix m;
  m.a = scale * ct;
  m.b = scale * (ct * tsh - st);
  m.c = scale * st;
  m.d = scale * (st * tsh + ct);
  m.tx = 0.0;
  m.ty = 0.0;
  return m;
}

Image flip_horizontal(const Image& img) {
  Image out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

Image flip_vertical(const Image& img) {
  Image out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(img.height - 1 - y, x, c);
  return out;
}

Image warp_affine(const Image& image, const AffineMatrix& m) {
  const int h = image.height, w = image.width, ch = image.channels;
  double det = m.a * m.d - m.b * m.c;
  if (std::fabs(det) < 1e-12)
    throw Error("warp_affine: singular linear part");

  if (is_signed_permutation(m) && m.tx == 0.0 && m.ty == 0.0) {
    // The centered grid maps onto itself when dimensions allow: always for
    // identity/flips/180, only for square images under 90/270.
    bool swaps_axes = m.a == 0.0;
    if (!swaps_axes || h == w) {
      Image out = Image::zeros(h, w, ch);
      // dest (x,y) pulls from src = M^{-1} (x,y); for a signed permutation
      // the inverse is the transpose.
      double ia = m.a, ib = m.c, ic = m.b, id = m.d;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          // centered coordinates scaled by 2 to stay integral for odd sizes
          int dx2 = 2 * x - (w - 1);
          int dy2 = 2 * y - (h - 1);
          int sx2 = static_cast<int>(ia) * dx2 + static_cast<int>(ib) * dy2;
          int sy2 = static_cast<int>(ic) * dx2 + static_cast<int>(id) * dy2;
          int sx = (sx2 + (w - 1)) / 2;
          int sy = (sy2 + (h - 1)) / 2;
          for (int c = 0; c < ch; ++c) out.at(y, x, c) = image.at(sy, sx, c);
        }
      }
      return out;
    }
  }

  // General path: inverse mapping about the center, bilinear, edge clamp.
  double ia = m.d / det, ib = -m.b / det;
  double ic = -m.c / det, id = m.a / det;
  double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);

  Image out = Image::zeros(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = x - cx - m.tx;
      double dy = y - cy - m.ty;
      double sx = ia * dx + ib * dy + cx;
      double sy = ic * dx + id * dy + cy;
      sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
      int x0 = static_cast<int>(sx);
      int y0 = static_cast<int>(sy);
      int x1 = std::min(x0 + 1, w - 1);
      int y1 = std::min(y0 + 1, h - 1);
      double fx = sx - x0, fy = sy - y0;
      for (int c = 0; c < ch; ++c) {
        double top = lerp(image.at(y0, x0, c), image.at(y0, x1, c), fx);
        double bot = lerp(image.at(y1, x0, c), image.at(y1, x1, c), fx);
        out.at(y, x, c) = lerp(top, bot, fy);
      }
    }
  }
  return out;
}

Image apply_transform(const Image& image, const TransformParams& params) {
  if (params.is_identity()) return image;

  Image work = image;
  if (params.flip_h) work = flip_horizontal(work);
  if (params.flip_v) work = flip_vertical(work);

  if (params.angle != 0.0 || params.shear != 0.0 || params.scale != 1.0)
    work = warp_affine(work, make_affine(params.angle, params.shear, params.scale));

  if (params.brightness != 1.0) {
    for (double& v : work.data) v = std::clamp(v * params.brightness, 0.0, 1.0);
  }
  return work;
}

std::vector<Image> augment_batch(const Dataset& dataset,
                                 std::span<const std::size_t> indices,
                                 const AugmentSpec& spec, RngStream& rng) {
  std::vector<Image> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    TransformParams p = sample_params(spec, rng);
    out.push_back(apply_transform(dataset.samples[idx].image, p));
  }
  return out;
}

}  // namespace tbench
