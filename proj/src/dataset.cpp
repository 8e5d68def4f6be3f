#include "tbench/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "tbench/error.hpp"

namespace fs = std::filesystem;

namespace tbench {

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (const auto& s : samples) counts[static_cast<std::size_t>(s.label)]++;
  return counts;
}

void Dataset::validate() const {
  if (class_names.empty()) throw ShapeError("dataset: empty class_names");
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= num_classes())
      throw ShapeError("dataset: label out of range");
  }
  if (!samples.empty()) {
    const Image& first = samples.front().image;
    for (const auto& s : samples) {
      if (!s.image.same_shape(first))
        throw ShapeError("dataset: mixed image dimensions");
    }
  }
}

DatasetView full_view(const Dataset& ds) {
  DatasetView v;
  v.dataset = &ds;
  v.indices.resize(ds.size());
  std::iota(v.indices.begin(), v.indices.end(), std::size_t{0});
  return v;
}

Dataset load_dataset(const fs::path& root_dir) {
  if (!fs::is_directory(root_dir))
    throw IoError("dataset root is not a directory: " + root_dir.string());

  std::vector<std::string> classes;
  for (const auto& entry : fs::directory_iterator(root_dir)) {
    if (entry.is_directory()) classes.push_back(entry.path().filename().string());
  }
  if (classes.empty())
    throw IoError("zero classes under dataset root: " + root_dir.string());
  std::sort(classes.begin(), classes.end());

  Dataset ds;
  ds.class_names = classes;
  for (int label = 0; label < ds.num_classes(); ++label) {
    fs::path class_dir = root_dir / classes[static_cast<std::size_t>(label)];
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      LabeledSample s;
      s.image = load_ppm(f);
      s.label = label;
      if (!ds.samples.empty() && !s.image.same_shape(ds.samples.front().image))
        throw IoError("mixed image dimensions at: " + f.string());
      ds.samples.push_back(std::move(s));
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& root_dir,
                  const std::string& extra_manifest_json) {
  ds.validate();
  fs::create_directories(root_dir);

  nlohmann::json manifest;
  if (!extra_manifest_json.empty())
    manifest = nlohmann::json::parse(extra_manifest_json);
  manifest["classes"] = nlohmann::json::object();

  std::vector<int> counter(ds.class_names.size(), 0);
  for (const auto& name : ds.class_names)
    fs::create_directories(root_dir / name);

  for (const auto& s : ds.samples) {
    const std::string& cls = ds.class_names[static_cast<std::size_t>(s.label)];
    char name[32];
    std::snprintf(name, sizeof(name), "img_%05d.%s", counter[s.label],
                  s.image.channels == 3 ? "ppm" : "pgm");
    counter[s.label]++;
    fs::path file = root_dir / cls / name;
    save_ppm(s.image, file);
    manifest["classes"][cls].push_back(std::string(name));
  }

  std::ofstream mf(root_dir / "manifest.json");
  if (!mf) throw IoError("cannot write manifest under: " + root_dir.string());
  mf << manifest.dump(1) << "\n";
}

}  // namespace tbench
