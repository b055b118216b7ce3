#include <iostream>

#include <CLI11.hpp>

#include "oto/core/error.hpp"
#include "oto/dataset/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a procedural five-class otoscopy-like image set with summaries"};
  std::filesystem::path out;
  oto::SyntheticOptions opt;
  app.add_option("--out", out, "Output directory (images/ and manifest.json)")->required();
  app.add_option("--per-class", opt.per_class, "Images per class")->capture_default_str();
  app.add_option("--size", opt.image_size, "Image side in pixels")->capture_default_str();
  app.add_option("--seed", opt.seed, "Generator seed")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (opt.per_class < 1 || opt.image_size < 16) throw oto::InvalidArgument("need --per-class >= 1 and --size >= 16");
    const auto m = oto::make_synthetic_dataset(out, opt);
    std::cout << "wrote " << m.size() << " records to " << (out / "manifest.json").string() << "\n";
  } catch (const oto::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
