#include <doctest.h>

#include <cmath>

#include "tbench/augment.hpp"
#include "tbench/error.hpp"
#include "tbench/rng.hpp"
#include "tbench/synthetic.hpp"

using namespace tbench;

namespace {

Image random_image(int h, int w, int ch, RngStream& rng) {
  Image img = Image::zeros(h, w, ch);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("zero-range spec draws identity params") {
  AugmentSpec spec;
  RngStream rng(1, "id");
  TransformParams p = sample_params(spec, rng);
  CHECK(p.is_identity());
  CHECK(p.angle == 0.0);
  CHECK(p.shear == 0.0);
  CHECK(p.scale == 1.0);
  CHECK(p.brightness == 1.0);
}

TEST_CASE("zoom range 1.0 clamps scale to [0.05, 2]") {
  AugmentSpec spec;
  spec.zoom_range = 1.0;
  RngStream rng(2, "zoom");
  for (int i = 0; i < 500; ++i) {
    TransformParams p = sample_params(spec, rng);
    CHECK(p.scale >= 0.05);
    CHECK(p.scale <= 2.0);
  }
}

TEST_CASE("fixed seed gives identical draws") {
  AugmentSpec spec;
  spec.horizontal_flip = true;
  spec.rotation_range = 40;
  spec.brightness_range = 0.25;
  RngStream a(3, "draw"), b(3, "draw");
  for (int i = 0; i < 20; ++i) {
    TransformParams pa = sample_params(spec, a);
    TransformParams pb = sample_params(spec, b);
    CHECK(pa.flip_h == pb.flip_h);
    CHECK(pa.angle == pb.angle);
    CHECK(pa.brightness == pb.brightness);
  }
}

TEST_CASE("flips are exact involutions and match the 2x2 definition") {
  RngStream rng(4, "flip");
  Image img = random_image(13, 17, 3, rng);
  CHECK(flip_horizontal(flip_horizontal(img)).data == img.data);
  CHECK(flip_vertical(flip_vertical(img)).data == img.data);

  Image two = Image::zeros(2, 2, 1);
  two.data = {1.0, 2.0, 3.0, 4.0};  // [[a,b],[c,d]]
  Image flipped = flip_horizontal(two);
  CHECK(flipped.data == std::vector<double>{2.0, 1.0, 4.0, 3.0});
}

TEST_CASE("identity matrix warp is bit-identical") {
  RngStream rng(5, "warpid");
  Image img = random_image(11, 8, 3, rng);
  Image out = warp_affine(img, AffineMatrix{});
  CHECK(out.data == img.data);
}

TEST_CASE("180-degree rotation is an exact pixel reversal on any shape") {
  RngStream rng(6, "warp180");
  Image img = random_image(9, 14, 3, rng);  // non-square on purpose
  Image out = warp_affine(img, make_affine(180, 0, 1));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        CHECK(out.at(y, x, c) == img.at(img.height - 1 - y, img.width - 1 - x, c));
  Image back = warp_affine(out, make_affine(180, 0, 1));
  CHECK(back.data == img.data);
}

TEST_CASE("four 90-degree rotations reproduce a square image exactly") {
  RngStream rng(7, "warp90");
  Image img = random_image(12, 12, 3, rng);
  Image cur = img;
  for (int i = 0; i < 4; ++i) cur = warp_affine(cur, make_affine(90, 0, 1));
  CHECK(cur.data == img.data);
}

TEST_CASE("singular matrices are rejected") {
  AffineMatrix m;
  m.a = 1;
  m.b = 1;
  m.c = 1;
  m.d = 1;
  RngStream rng(8, "sing");
  Image img = random_image(8, 8, 1, rng);
  CHECK_THROWS_AS(warp_affine(img, m), Error);
}

TEST_CASE("warping a constant image by any affine conserves the constant exactly") {
  Image img = Image::zeros(10, 10, 3);
  for (double& v : img.data) v = 0.37;
  RngStream rng(9, "const");
  for (int i = 0; i < 100; ++i) {
    AffineMatrix m = make_affine(rng.uniform(-180, 180), rng.uniform(-45, 45),
                                 rng.uniform(0.3, 1.8));
    Image out = warp_affine(img, m);
    for (double v : out.data) CHECK(v == 0.37);
  }
}

TEST_CASE("apply_transform identity and member semantics") {
  RngStream rng(10, "apply");
  Image img = random_image(16, 16, 3, rng);
  CHECK(apply_transform(img, TransformParams{}).data == img.data);

  TransformParams bright;
  bright.brightness = 2.0;
  Image c = Image::zeros(4, 4, 1);
  for (double& v : c.data) v = 0.6;
  Image out = apply_transform(c, bright);
  for (double v : out.data) CHECK(v == 1.0);  // clamped

  TransformParams zero_ops;
  zero_ops.shear = 0.0;
  zero_ops.scale = 1.0;
  zero_ops.brightness = 1.0;
  CHECK(apply_transform(img, zero_ops).data == img.data);
}

TEST_CASE("outputs stay in [0,1] and preserve dimensions under random params") {
  AugmentSpec spec;
  spec.horizontal_flip = true;
  spec.vertical_flip = true;
  spec.rotation_range = 180;
  spec.shear_range = 89;
  spec.zoom_range = 1.0;
  spec.brightness_range = 0.5;
  RngStream rng(11, "range");
  Image img = random_image(16, 16, 3, rng);
  for (int i = 0; i < 500; ++i) {
    TransformParams p = sample_params(spec, rng);
    Image out = apply_transform(img, p);
    CHECK(out.same_shape(img));
    for (double v : out.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("augment_batch: disabled spec copies, same seed repeats, stream advances") {
  SyntheticSpec sspec;
  sspec.per_class = 2;
  sspec.side = 16;
  RngStream drng(12, "data");
  Dataset ds = generate_synthetic(sspec, drng);
  std::vector<std::size_t> idx{0, 3, 5};

  AugmentSpec disabled;
  RngStream r1(13, "aug");
  auto plain = augment_batch(ds, idx, disabled, r1);
  for (std::size_t i = 0; i < idx.size(); ++i)
    CHECK(plain[i].data == ds.samples[idx[i]].image.data);

  AugmentSpec spec;
  spec.rotation_range = 90;
  RngStream r2(13, "aug2");
  RngStream r3(13, "aug2");
  auto b1 = augment_batch(ds, idx, spec, r2);
  auto b2 = augment_batch(ds, idx, spec, r3);
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(b1[i].data == b2[i].data);

  auto epoch2 = augment_batch(ds, idx, spec, r2);  // same stream, advanced
  bool any_diff = false;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (epoch2[i].data != b1[i].data) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("spec validation rejects tan-singular shear and negative ranges") {
  AugmentSpec s;
  s.shear_range = 90.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  AugmentSpec neg;
  neg.rotation_range = -1;
  CHECK_THROWS_AS(neg.validate(), ConfigError);
}

TEST_CASE("AugmentSpec JSON round-trip") {
  AugmentSpec s;
  s.horizontal_flip = true;
  s.rotation_range = 180;
  s.shear_range = 89;
  s.zoom_range = 1.0;
  AugmentSpec back = AugmentSpec::from_json(s.to_json());
  CHECK(back.horizontal_flip == s.horizontal_flip);
  CHECK(back.rotation_range == s.rotation_range);
  CHECK(back.shear_range == s.shear_range);
  CHECK(back.zoom_range == s.zoom_range);
}
