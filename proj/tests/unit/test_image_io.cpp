#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tbench/dataset.hpp"
#include "tbench/error.hpp"
#include "tbench/image.hpp"
#include "tbench/rng.hpp"

using namespace tbench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tbench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Image solid(int h, int w, int ch, double v) {
  Image img = Image::zeros(h, w, ch);
  for (double& x : img.data) x = v;
  return img;
}

}  // namespace

TEST_CASE("ppm round-trip error is bounded by the quantization step") {
  fs::path dir = temp_dir("roundtrip");
  RngStream rng(3, "img");
  Image img = Image::zeros(9, 7, 3);
  for (double& v : img.data) v = rng.uniform();
  save_ppm(img, dir / "a.ppm");
  Image back = load_ppm(dir / "a.ppm");
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(back.data[i] - img.data[i]) <= 1.0 / 255.0);
}

TEST_CASE("quantization endpoints and round-half-up") {
  fs::path dir = temp_dir("quant");
  Image img = Image::zeros(1, 3, 1);
  img.data = {0.0, 0.5, 1.0};
  save_ppm(img, dir / "g.pgm");

  std::ifstream in(dir / "g.pgm", std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "P5");
  std::getline(in, header);  // dims
  std::getline(in, header);  // maxval
  unsigned char bytes[3];
  in.read(reinterpret_cast<char*>(bytes), 3);
  CHECK(bytes[0] == 0);
  CHECK(bytes[1] == 128);  // round(127.5) rounds half up
  CHECK(bytes[2] == 255);

  Image back = load_ppm(dir / "g.pgm");
  CHECK(back.data[0] == 0.0);
  CHECK(back.data[2] == 1.0);
}

TEST_CASE("1x1 white image has the exact documented byte layout") {
  fs::path dir = temp_dir("white");
  save_ppm(solid(1, 1, 3, 1.0), dir / "w.ppm");
  std::ifstream in(dir / "w.ppm", std::ios::binary);
  std::string all((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  CHECK(all == std::string("P6\n1 1\n255\n\xFF\xFF\xFF", 14));
}

TEST_CASE("malformed and missing files are reported with the path") {
  fs::path dir = temp_dir("bad");
  std::ofstream(dir / "bad.ppm") << "NOTAPPM";
  CHECK_THROWS_AS(load_ppm(dir / "bad.ppm"), IoError);
  CHECK_THROWS_AS(load_ppm(dir / "missing.ppm"), IoError);
  try {
    load_ppm(dir / "bad.ppm");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("bad.ppm") != std::string::npos);
  }
}

TEST_CASE("load_dataset sorts classes lexicographically and samples by filename") {
  fs::path dir = temp_dir("ds");
  fs::create_directories(dir / "metal");
  fs::create_directories(dir / "glass");
  save_ppm(solid(4, 4, 3, 0.1), dir / "glass" / "b.ppm");
  save_ppm(solid(4, 4, 3, 0.2), dir / "glass" / "a.ppm");
  save_ppm(solid(4, 4, 3, 0.3), dir / "metal" / "z.ppm");
  save_ppm(solid(4, 4, 3, 0.4), dir / "metal" / "m.ppm");
  save_ppm(solid(4, 4, 3, 0.5), dir / "metal" / "n.ppm");

  Dataset ds = load_dataset(dir);
  REQUIRE(ds.num_classes() == 2);
  CHECK(ds.class_names[0] == "glass");
  CHECK(ds.class_names[1] == "metal");
  REQUIRE(ds.size() == 5);
  CHECK(ds.samples[0].label == 0);
  CHECK(ds.samples[0].image.data[0] == doctest::Approx(0.2));  // glass/a first
  CHECK(ds.samples[2].label == 1);
  CHECK(ds.samples[2].image.data[0] == doctest::Approx(0.4));  // metal/m first

  Dataset again = load_dataset(dir);
  REQUIRE(again.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(again.samples[i].label == ds.samples[i].label);
    CHECK(again.samples[i].image.data == ds.samples[i].image.data);
  }
}

TEST_CASE("empty dataset root reports zero classes") {
  fs::path dir = temp_dir("empty");
  CHECK_THROWS_WITH_AS(load_dataset(dir),
                       doctest::Contains("zero classes"), IoError);
}

TEST_CASE("mixed dimensions are rejected with the offending path") {
  fs::path dir = temp_dir("mixed");
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  save_ppm(solid(4, 4, 3, 0.1), dir / "a" / "x.ppm");
  save_ppm(solid(5, 4, 3, 0.1), dir / "b" / "y.ppm");
  CHECK_THROWS_AS(load_dataset(dir), IoError);
}

TEST_CASE("save_dataset writes a manifest and reloads identically") {
  fs::path dir = temp_dir("save");
  Dataset ds;
  ds.class_names = {"one", "two"};
  ds.samples.push_back({solid(4, 4, 3, 0.25), 0});
  ds.samples.push_back({solid(4, 4, 3, 0.75), 1});
  save_dataset(ds, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  Dataset back = load_dataset(dir);
  CHECK(back.class_names == ds.class_names);
  REQUIRE(back.size() == 2);
}
