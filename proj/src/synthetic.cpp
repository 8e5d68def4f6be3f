#include "tbench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "tbench/error.hpp"

namespace tbench {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Class order is lexicographic, matching load_dataset.
const char* kClassNames[kSyntheticClasses] = {"circle", "rectangle", "ring",
                                              "stripes", "triangle"};

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(double h_deg, double s, double v) {
  double h = h_deg - 360.0 * std::floor(h_deg / 360.0);
  double c = v * s;
  double hp = h / 60.0;
  double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  double m = v - c;
  return {r + m, g + m, b + m};
}

double smoothstep(double e0, double e1, double x) {
  double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Signed distance to each shape in unit coordinates (image spans [-1,1]).
// Negative inside. Soft edges keep the renders band-limited enough for a
// small CNN to fit without aliasing artifacts dominating.
double shape_distance(int cls, double u, double v) {
  switch (cls) {
    case 0:  // circle
      return std::sqrt(u * u + v * v) - 0.55;
    case 1: {  // rectangle, deliberately non-square so orientation matters
      double du = std::fabs(u) - 0.62;
      double dv = std::fabs(v) - 0.36;
      return std::max(du, dv);
    }
    case 2: {  // ring
      double r = std::sqrt(u * u + v * v);
      return std::max(r - 0.58, 0.34 - r);
    }
    case 3: {  // stripes: handled separately (intensity pattern, not a blob)
      double du = std::fabs(u) - 0.68;
      double dv = std::fabs(v) - 0.68;
      return std::max(du, dv);
    }
    case 4: {  // triangle: vertices (0,-0.62), (-0.60,0.50), (0.60,0.50)
      double d_base = v - 0.50;
      double d_side = (1.12 * std::fabs(u) - 0.60 * (v + 0.62)) / 1.2706;
      return std::max(d_base, d_side);
    }
    default:
      throw Error("unknown synthetic class");
  }
}

}  // namespace

std::string SyntheticSpec::to_json() const {
  nlohmann::json j;
  j["per_class"] = per_class;
  j["side"] = side;
  j["noise_sigma"] = noise_sigma;
  j["channels"] = channels;
  j["hue_offset_deg"] = hue_offset_deg;
  j["hue_spread_deg"] = hue_spread_deg;
  j["pose_rotation_max"] = pose_rotation_max;
  j["pose_shear_max"] = pose_shear_max;
  j["random_hflip"] = random_hflip;
  return j.dump();
}

SyntheticSpec SyntheticSpec::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  SyntheticSpec s;
  s.per_class = j.at("per_class").get<int>();
  s.side = j.at("side").get<int>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  if (j.contains("channels")) s.channels = j.at("channels").get<int>();
  if (j.contains("hue_offset_deg")) s.hue_offset_deg = j.at("hue_offset_deg").get<double>();
  if (j.contains("hue_spread_deg")) s.hue_spread_deg = j.at("hue_spread_deg").get<double>();
  if (j.contains("pose_rotation_max")) s.pose_rotation_max = j.at("pose_rotation_max").get<double>();
  if (j.contains("pose_shear_max")) s.pose_shear_max = j.at("pose_shear_max").get<double>();
  if (j.contains("random_hflip")) s.random_hflip = j.at("random_hflip").get<bool>();
  return s;
}

Dataset generate_synthetic(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.per_class < 1) throw ConfigError("synthetic: per_class must be >= 1");
  if (spec.side < 16) throw ConfigError("synthetic: side must be >= 16");
  if (spec.channels != 1 && spec.channels != 3)
    throw ConfigError("synthetic: channels must be 1 or 3");

  Dataset ds;
  for (const char* name : kClassNames) ds.class_names.emplace_back(name);

  const int side = spec.side;
  const double edge = 2.0 / side;  // ~1 pixel of soft edge in unit coords
  const double background = 0.15;

  for (int cls = 0; cls < kSyntheticClasses; ++cls) {
    double hue = spec.hue_offset_deg + spec.hue_spread_deg * cls / kSyntheticClasses;
    Rgb color = hsv_to_rgb(hue, 0.75, 0.85);
    double gray = 0.299 * color.r + 0.587 * color.g + 0.114 * color.b;

    for (int i = 0; i < spec.per_class; ++i) {
      // Pose draws happen unconditionally so the stream layout does not
      // depend on which jitters are enabled.
      double rot = rng.uniform(-spec.pose_rotation_max, spec.pose_rotation_max);
      double shear = rng.uniform(-spec.pose_shear_max, spec.pose_shear_max);
      double flip_draw = rng.uniform();
      bool hflip = spec.random_hflip && flip_draw < 0.5;

      double ct = std::cos(rot * kPi / 180.0), st = std::sin(rot * kPi / 180.0);
      double tsh = std::tan(shear * kPi / 180.0);

      Image img = Image::zeros(side, side, spec.channels);
      for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
          double u = (2.0 * x - (side - 1)) / side;
          double v = (2.0 * y - (side - 1)) / side;
          if (hflip) u = -u;
          // Inverse pose: un-rotate, then un-shear, and evaluate the
          // canonical shape there.
          double ru = ct * u + st * v;
          double rv = -st * u + ct * v;
          ru -= tsh * rv;

          double d = shape_distance(cls, ru, rv);
          double alpha = smoothstep(edge, -edge, d);
          if (cls == 3 && alpha > 0.0) {
            // stripe bands inside the square mask
            double band = 0.5 + 0.5 * std::sin(rv * 2.0 * kPi / 0.45);
            alpha *= band;
          }
          if (spec.channels == 3) {
            img.at(y, x, 0) = background + alpha * (color.r - background);
            img.at(y, x, 1) = background + alpha * (color.g - background);
            img.at(y, x, 2) = background + alpha * (color.b - background);
          } else {
            img.at(y, x, 0) = background + alpha * (gray - background);
          }
        }
      }
      if (spec.noise_sigma > 0.0) {
        for (double& value : img.data) {
          value = std::clamp(value + rng.normal(0.0, spec.noise_sigma), 0.0, 1.0);
        }
      }
      ds.samples.push_back(LabeledSample{std::move(img), cls});
    }
  }

  ds.validate();
  return ds;
}

void generate_synthetic_to_dir(const SyntheticSpec& spec, RngStream& rng,
                               const std::filesystem::path& out_dir) {
  nlohmann::json manifest;
  manifest["spec"] = nlohmann::json::parse(spec.to_json());
  manifest["master_seed"] = rng.master_seed();
  manifest["stream_key"] = rng.stream_key();
  Dataset ds = generate_synthetic(spec, rng);
  save_dataset(ds, out_dir, manifest.dump());
}

}  // namespace tbench
