#include "oto/dataset/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

namespace oto {

namespace {

struct Color {
  double r, g, b;
};

// Smooth random field: a coarse lattice of uniform values, bilinearly upsampled.
class ValueNoise {
 public:
  ValueNoise(int cells, Rng& rng) : cells_(cells), lattice_((cells + 1) * (cells + 1)) {
    for (auto& v : lattice_) v = rng.uniform(-1.0, 1.0);
  }
  double at(double u, double v) const {  // u, v in [0, 1]
    const double x = std::clamp(u, 0.0, 1.0) * cells_;
    const double y = std::clamp(v, 0.0, 1.0) * cells_;
    const int x0 = std::min(static_cast<int>(x), cells_ - 1);
    const int y0 = std::min(static_cast<int>(y), cells_ - 1);
    const double fx = x - x0, fy = y - y0;
    auto L = [&](int i, int j) { return lattice_[j * (cells_ + 1) + i]; };
    const double top = L(x0, y0) + fx * (L(x0 + 1, y0) - L(x0, y0));
    const double bot = L(x0, y0 + 1) + fx * (L(x0 + 1, y0 + 1) - L(x0, y0 + 1));
    return top + fy * (bot - top);
  }

 private:
  int cells_;
  std::vector<double> lattice_;
};

Color jitter(Color c, double amount, Rng& rng) {
  return {c.r + rng.uniform(-amount, amount), c.g + rng.uniform(-amount, amount), c.b + rng.uniform(-amount, amount)};
}

Color mix(Color a, Color b, double t) {
  return {a.r + t * (b.r - a.r), a.g + t * (b.g - a.g), a.b + t * (b.b - a.b)};
}

struct Blob {
  double x, y, rx, ry, angle;
  bool contains(double px, double py) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = px - x, dy = py - y;
    const double u = (c * dx + s * dy) / rx, v = (-s * dx + c * dy) / ry;
    return u * u + v * v <= 1.0;
  }
  double falloff(double px, double py) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = px - x, dy = py - y;
    const double u = (c * dx + s * dy) / rx, v = (-s * dx + c * dy) / ry;
    return std::max(0.0, 1.0 - std::sqrt(u * u + v * v));
  }
};

Blob random_blob(Rng& rng, double cx, double cy, double spread, double rmin, double rmax) {
  return {cx + rng.uniform(-spread, spread), cy + rng.uniform(-spread, spread), rng.uniform(rmin, rmax),
          rng.uniform(rmin, rmax), rng.uniform(0.0, std::numbers::pi)};
}

}  // namespace

SyntheticTraits draw_traits(Rng& rng) {
  SyntheticTraits t;
  t.wide_view = rng.uniform_index(2) == 1;
  t.extensive = rng.uniform_index(2) == 1;
  t.dim_light = rng.uniform_index(2) == 1;
  return t;
}

RgbImage render_synthetic_image(ClassLabel label, int size, const SyntheticTraits& traits, Rng& rng) {
  RgbImage img(size, size);
  const double cx = 0.5 + rng.uniform(-0.04, 0.04);
  const double cy = 0.5 + rng.uniform(-0.04, 0.04);
  const double radius = traits.wide_view ? rng.uniform(0.43, 0.47) : rng.uniform(0.32, 0.36);
  const double extent = traits.extensive ? 1.25 : 0.7;
  const double light = traits.dim_light ? 0.62 : 1.0;
  ValueNoise coarse(4, rng), fine(12, rng);

  Color base{};
  std::vector<Blob> blobs;
  Color feature{};
  switch (label) {
    case ClassLabel::AcuteOtitisMedia:
      base = jitter({205, 70, 55}, 18, rng);
      feature = jitter({245, 150, 120}, 10, rng);
      blobs.push_back(random_blob(rng, cx, cy, 0.05, 0.18 * extent, 0.28 * extent));
      break;
    case ClassLabel::CerumenImpaction:
      base = jitter({150, 100, 40}, 18, rng);
      feature = jitter({80, 50, 20}, 10, rng);
      for (int i = 0; i < 5; ++i) blobs.push_back(random_blob(rng, cx, cy, 0.25, 0.06 * extent, 0.16 * extent));
      break;
    case ClassLabel::ChronicOtitisMedia:
      base = jitter({215, 145, 135}, 15, rng);
      feature = jitter({45, 20, 20}, 8, rng);
      blobs.push_back(random_blob(rng, cx, cy, 0.12, 0.08 * extent, 0.16 * extent));
      break;
    case ClassLabel::Myringosclerosis:
      base = jitter({185, 160, 160}, 15, rng);
      feature = jitter({245, 245, 238}, 6, rng);
      for (int i = 0; i < 3; ++i) blobs.push_back(random_blob(rng, cx, cy, 0.22, 0.05 * extent, 0.11 * extent));
      break;
    case ClassLabel::Normal:
      base = jitter({165, 168, 182}, 15, rng);
      feature = jitter({250, 250, 250}, 5, rng);
      break;
  }
  const double light_angle = rng.uniform(0.6, 1.2);  // cone of light direction

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size, v = (y + 0.5) / size;
      const double dx = u - cx, dy = v - cy;
      const double r = std::sqrt(dx * dx + dy * dy);
      Color c;
      if (r > radius) {
        const double edge = std::clamp((r - radius) * 30.0, 0.0, 1.0);
        c = mix({60, 35, 30}, {8, 6, 6}, edge);
      } else {
        c = mix(base, {base.r * 0.7, base.g * 0.7, base.b * 0.7}, r / radius * 0.6);
        const double n = 18.0 * coarse.at(u, v);
        c = {c.r + n, c.g + n, c.b + n};
        switch (label) {
          case ClassLabel::AcuteOtitisMedia: {
            const double f = blobs[0].falloff(u, v);
            c = mix(c, feature, std::min(1.0, 1.5 * f));
            const double vessel = std::abs(std::sin(40.0 * (u + 0.3 * fine.at(u, v))));
            if (vessel < 0.08) c = mix(c, {150, 10, 20}, 0.7);
            break;
          }
          case ClassLabel::CerumenImpaction: {
            for (const auto& b : blobs) {
              if (b.contains(u, v)) c = mix(c, feature, 0.75 + 0.2 * fine.at(u, v));
            }
            const double grain = 25.0 * fine.at(u * 0.7, v * 0.7);
            c = {c.r + grain, c.g + grain * 0.8, c.b + grain * 0.3};
            break;
          }
          case ClassLabel::ChronicOtitisMedia:
            if (blobs[0].contains(u, v)) c = mix(c, feature, 0.9);
            if (fine.at(u, v) > 0.75) c = mix(c, {230, 210, 120}, 0.6);
            break;
          case ClassLabel::Myringosclerosis:
            for (const auto& b : blobs) {
              if (b.contains(u + 0.03 * fine.at(u, v), v)) c = mix(c, feature, 0.85);
            }
            break;
          case ClassLabel::Normal: {
            const double ang = std::atan2(dy, dx);
            if (r > 0.05 && r < radius * 0.85 && std::abs(ang - light_angle) < 0.18 * extent) c = mix(c, feature, 0.8);
            if (std::abs(dx + 0.35 * dy) < 0.012 && dy < 0 && r < radius * 0.7) c = mix(c, {235, 225, 215}, 0.7);
            break;
          }
        }
      }
      if (r <= radius) c = {c.r * light, c.g * light, c.b * light};
      const double noise = rng.normal(0.0, 5.0);
      img.at(x, y, 0) = static_cast<std::uint8_t>(std::clamp(c.r + noise, 0.0, 255.0));
      img.at(x, y, 1) = static_cast<std::uint8_t>(std::clamp(c.g + noise, 0.0, 255.0));
      img.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(c.b + noise, 0.0, 255.0));
    }
  }
  return img;
}

std::string synthetic_summary(ClassLabel label, const SyntheticTraits& traits) {
  using Bank = std::vector<std::string>;
  static const std::array<std::array<Bank, 3>, kNumClasses> kBanks = {{
      {{{"This otoscopic image shows signs of Acute Otitis Media, an infection of the middle ear.",
         "The ear shows Acute Otitis Media, a fresh infection behind the eardrum."},
        {"The eardrum looks red and bulging because fluid is trapped behind it.",
         "The eardrum appears swollen and inflamed with visible red vessels."},
        {"You may have ear pain and fever; a doctor may prescribe medicine.",
         "You may feel pain or pressure in the ear; please see a doctor soon."}}},
      {{{"This otoscopic image shows Cerumen Impaction, a build up of ear wax.",
         "The ear canal is blocked by ear wax, called Cerumen Impaction."},
        {"Brown wax covers most of the view of the eardrum.",
         "Dark clumps of wax fill the canal and hide the eardrum."},
        {"You may notice muffled hearing; a doctor can safely remove the wax.",
         "You may feel fullness in the ear; avoid cotton buds and ask a doctor to clean it."}}},
      {{{"This otoscopic image shows signs of Chronic Otitis Media, a long lasting infection of the middle ear.",
         "The ear shows Chronic Otitis Media, an infection that has lasted a long time."},
        {"There is a dark hole in the eardrum with some discharge around it.",
         "The eardrum has a perforation and looks damaged."},
        {"You may have hearing loss or discharge from the ear; surgery may be needed to repair the eardrum.",
         "You may notice fluid leaking from the ear; please see an ear specialist."}}},
      {{{"This otoscopic image shows Myringosclerosis, scarring of the eardrum.",
         "The ear shows Myringosclerosis, where chalky patches form on the eardrum."},
        {"White chalky patches are visible on the eardrum.",
         "Several white spots of calcium sit on the eardrum."},
        {"It usually causes no symptoms, but a hearing check is a good idea.",
         "You may not notice anything; a doctor can check your hearing."}}},
      {{{"This otoscopic image shows a Normal ear.",
         "The ear appears Normal with a healthy eardrum."},
        {"The eardrum is pearly gray with a bright cone of light.",
         "The eardrum looks clear and intact with normal landmarks."},
        {"No treatment is needed.", "There are no signs of infection or wax build up."}}},
  }};
  const auto& banks = kBanks[code(label)];
  const std::array<bool, 3> pick{traits.wide_view, traits.extensive, traits.dim_light};
  std::string out;
  for (std::size_t i = 0; i < banks.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += banks[i][pick[i] ? 1 : 0];
  }
  return out;
}

DatasetManifest make_synthetic_dataset(const std::filesystem::path& out_dir, const SyntheticOptions& options) {
  Rng rng(options.seed);
  const auto dir = std::filesystem::absolute(out_dir);
  std::vector<ImageRecord> records;
  for (auto label : kAllLabels) {
    for (int i = 0; i < options.per_class; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%03d", std::string(label_name(label)).c_str(), i);
      ImageRecord r;
      r.id = id;
      r.image_path = dir / "images" / (r.id + ".png");
      r.label = label;
      Rng image_rng = rng.fork(records.size());
      const auto traits = draw_traits(image_rng);
      write_png(render_synthetic_image(label, options.image_size, traits, image_rng), r.image_path);
      r.summary = synthetic_summary(label, traits);
      r.source = "synthetic";
      records.push_back(std::move(r));
    }
  }
  auto manifest = DatasetManifest::from_records(std::move(records));
  save_manifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace oto
