#pragma once

#include <cstdint>
#include <filesystem>

#include "oto/core/random.hpp"
#include "oto/dataset/image.hpp"
#include "oto/dataset/labels.hpp"
#include "oto/dataset/manifest.hpp"

namespace oto {

struct SyntheticOptions {
  int per_class = 100;
  int image_size = 128;
  std::uint64_t seed = 7;
};

/// Visible per-image attributes; each one selects a phrase of the summary.
struct SyntheticTraits {
  bool wide_view = true;   // larger field of view
  bool extensive = false;  // larger lesions / brighter light reflex
  bool dim_light = false;  // darker illumination of the membrane
};

SyntheticTraits draw_traits(Rng& rng);

/// Procedural stand-in for an otoscopic image of the given class: a dark
/// circular field of view with a class-specific membrane colour and texture.
RgbImage render_synthetic_image(ClassLabel label, int size, const SyntheticTraits& traits, Rng& rng);

/// Three sentences from per-class phrase banks, one per trait.
std::string synthetic_summary(ClassLabel label, const SyntheticTraits& traits);

/// Writes images/<id>.png and manifest.json under `out_dir`; returns the manifest.
DatasetManifest make_synthetic_dataset(const std::filesystem::path& out_dir, const SyntheticOptions& options);

}  // namespace oto
