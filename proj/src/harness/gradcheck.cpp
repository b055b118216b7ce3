#include "oto/harness/gradcheck.hpp"

#include <algorithm>
#include <cstdio>

#include "oto/classifier/objective.hpp"
#include "oto/core/random.hpp"
#include "oto/generator/objective.hpp"
#include "oto/nn/grad_check.hpp"

namespace oto::harness {

namespace {

using classifier::LossMode;

Mat<double> random_image(int channels, int size, Rng& rng) {
  Mat<double> m(channels, size * size);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, 1.0);
  return m;
}

template <class Fn>
GradCheckRow check(const std::string& name, Fn&& objective, nn::ParameterStore<double>& params,
                   const GradCheckSettings& s) {
  auto loss = [&](nn::ParameterStore<double>& p, bool with_grad) {
    const double v = objective(p, with_grad);
    if (with_grad && s.fault_scale != 1.0) {
      for (auto& t : p) t.grad *= s.fault_scale;
    }
    return v;
  };
  nn::GradCheckOptions opt;
  opt.eps = s.eps;
  opt.min_coords = s.coords;
  opt.seed = s.seed;
  const auto rep = nn::grad_check<double>(loss, params, opt);
  return {name,           rep.max_rel_error, rep.coords_checked,        rep.worst_parameter,
          rep.worst_analytic, rep.worst_numeric,  rep.max_rel_error < s.tolerance};
}

classifier::ResNetConfig toy_resnet() {
  classifier::ResNetConfig c;
  c.input_size = 12;
  c.stem_channels = 4;
  c.stem_kernel = 3;
  c.stem_stride = 1;
  c.widths = {4, 4, 6, 6};
  c.blocks_per_stage = 1;
  c.embedding_dim = 6;
  c.num_classes = 3;
  return c;
}

generator::GeneratorConfig toy_generator() {
  generator::GeneratorConfig c;
  c.image_size = 16;
  c.patch = 4;
  c.image_widths = {4, 4, 4};
  c.image_dim = 8;
  c.d_model = 8;
  c.heads = 2;
  c.ff_dim = 16;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.vocab_size = 12;
  return c;
}

}  // namespace

std::vector<GradCheckRow> run_gradchecks(const GradCheckSettings& s) {
  std::vector<GradCheckRow> rows;
  Rng rng(s.seed);

  {
    const auto cfg = toy_resnet();
    const auto graph = classifier::build_resnet_graph(cfg);
    std::vector<Mat<double>> images;
    for (int i = 0; i < 9; ++i) images.push_back(random_image(cfg.in_channels, cfg.input_size, rng));
    const std::vector<int> labels{0, 0, 0, 1, 1, 1, 2, 2, 2};
    std::vector<classifier::TrainSample<double>> batch;
    for (int a : {0, 3, 6}) batch.push_back({&images[a], labels[a], &images[a + 1], &images[(a + 4) % 9]});
    const std::pair<const char*, LossMode> modes[] = {
        {"triplet", LossMode::Triplet}, {"cross_entropy", LossMode::CrossEntropy}, {"combined", LossMode::Combined}};
    for (const auto& [name, mode] : modes) {
      auto params = nn::init_parameters<double>(graph, s.seed);
      const classifier::ResNet<double> net(cfg, params);
      auto objective = [&, mode = mode](nn::ParameterStore<double>& p, bool with_grad) {
        return classifier::batch_objective<double>(net, p, batch, mode, classifier::kDefaultMargin,
                                                   classifier::TripletReduction::Mean, with_grad)
            .total;
      };
      rows.push_back(check(name, objective, params, s));
    }
  }

  {
    const auto cfg = toy_generator();
    auto params = nn::init_parameters<double>(generator::build_generator_graph(cfg), s.seed);
    const generator::Seq2Seq<double> net(cfg, params);
    std::vector<Mat<double>> images;
    for (int i = 0; i < 2; ++i) images.push_back(random_image(cfg.image_channels, cfg.image_size, rng));
    std::vector<generator::SequenceSample<double>> batch{
        {&images[0], {4, 5, 6, 7}, {1, 8, 9, 10}, {8, 9, 10, 2}},
        {&images[1], {4, 11, 6}, {1, 10, 10, 9, 11}, {10, 10, 9, 11, 2}},
    };
    auto objective = [&](nn::ParameterStore<double>& p, bool with_grad) {
      return generator::generator_objective<double>(net, p, batch, with_grad);
    };
    rows.push_back(check("generator_token_ce", objective, params, s));
  }
  return rows;
}

bool all_pass(const std::vector<GradCheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const GradCheckRow& r) { return r.pass; });
}

void print_gradcheck_table(std::ostream& os, const std::vector<GradCheckRow>& rows, double tolerance) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %14s %8s  %-6s %s\n", "loss", "max_rel_error", "coords", "status",
                "worst_parameter");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-20s %14.6e %8zu  %-6s %s\n", r.loss.c_str(), r.max_rel_error,
                  r.coords_checked, r.pass ? "PASS" : "FAIL", r.worst_parameter.c_str());
    os << line;
  }
  std::snprintf(line, sizeof(line), "tolerance %.1e\n", tolerance);
  os << line;
}

}  // namespace oto::harness
