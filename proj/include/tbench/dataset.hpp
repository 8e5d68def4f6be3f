#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tbench/image.hpp"

namespace tbench {

struct LabeledSample {
  Image image;
  int label = 0;  // index into Dataset::class_names
};

/// Immutable after construction; sample order is stable and reproducible.
/// Class order is lexicographic everywhere — label indices carry no other
/// meaning.
struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> class_names;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::size_t size() const { return samples.size(); }
  std::vector<std::size_t> class_counts() const;

  /// Throws if a label is out of range, class_names is empty, or image
  /// dimensions are mixed.
  void validate() const;
};

/// A borrowed subset of a dataset, identified by sample indices.
struct DatasetView {
  const Dataset* dataset = nullptr;
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  const LabeledSample& sample(std::size_t i) const {
    return dataset->samples[indices[i]];
  }
};

DatasetView full_view(const Dataset& ds);

/// Loads `root/<class_name>/<file>.ppm|.pgm`. Classes sorted
/// lexicographically; samples sorted by (class, filename); pixels scaled to
/// [0,1]. Errors (missing dir, zero classes, mixed dimensions, malformed
/// headers) name the offending path.
Dataset load_dataset(const std::filesystem::path& root_dir);

/// Writes one subdirectory per class plus a manifest.json recording the
/// per-class file lists (and, via extra_manifest, generation provenance).
void save_dataset(const Dataset& ds, const std::filesystem::path& root_dir,
                  const std::string& extra_manifest_json = "");

}  // namespace tbench
