#include <gtest/gtest.h>

#include "oto/core/hash.hpp"
#include "oto/nn/adam.hpp"
#include "oto/nn/attention.hpp"
#include "oto/nn/checkpoint.hpp"
#include "oto/nn/grad_check.hpp"
#include "oto/nn/graph.hpp"
#include "oto/nn/sequential.hpp"
#include "support.hpp"

using namespace oto;
using namespace oto::nn;

namespace {

ParameterStore<double> single(double value, double grad) {
  ParameterStore<double> p;
  p.add("w", {1}, InitKind::Zeros);
  p[0].value(0, 0) = value;
  p[0].grad(0, 0) = grad;
  return p;
}

MatD random_mat(Rng& rng, Eigen::Index r, Eigen::Index c) {
  MatD m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST(Init, DenseUniformBoundsAndZeroBias) {
  LayerGraph g;
  g.add(dense_spec("fc", 4, 2), true);
  const auto p = init_parameters<double>(g, 7);
  const auto& w = p.value(p.handle("fc.weight"));
  EXPECT_EQ(w.rows(), 2);
  EXPECT_EQ(w.cols(), 4);
  EXPECT_LE(w.cwiseAbs().maxCoeff(), 0.5);
  EXPECT_TRUE(p.value(p.handle("fc.bias")).isZero());
}

TEST(Init, SeedDeterminism) {
  LayerGraph g;
  g.add(conv2d_spec("c", {3, 8, 8}, 4, 3, 1, 1), true);
  g.add(global_avg_pool_spec("gap", g.layers.back().out_shape));
  g.add(dense_spec("fc", 4, 5));
  const auto a = init_parameters<float>(g, 1), b = init_parameters<float>(g, 1), c = init_parameters<float>(g, 2);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
  EXPECT_NE(a[0].value, c[0].value);
}

TEST(Graph, ShapeMismatchRejected) {
  LayerGraph g;
  g.add(dense_spec("a", 4, 3), true);
  g.add(dense_spec("b", 5, 2));
  EXPECT_THROW(g.validate(), ShapeError);
  EXPECT_THROW(register_parameters<float>(g), ShapeError);
}

TEST(Graph, JsonRoundTrip) {
  LayerGraph g;
  g.add(conv2d_spec("c", {3, 9, 9}, 4, 3, 2, 1), true);
  g.add(relu_spec("r", g.layers.back().out_shape));
  g.add(global_avg_pool_spec("gap", g.layers.back().out_shape));
  const auto back = LayerGraph::from_json(g.to_json());
  EXPECT_EQ(back.to_json(), g.to_json());
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto p = single(1.0, 0.5);
  AdamState<double> s(p, {});
  adam_step(p, s);
  EXPECT_NEAR(p[0].value(0, 0), 0.999, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParameter) {
  auto p = single(1.0, 0.0);
  AdamState<double> s(p, {});
  adam_step(p, s);
  EXPECT_EQ(p[0].value(0, 0), 1.0);
}

TEST(Adam, SignSymmetry) {
  auto a = single(0.3, 0.7), b = single(0.3, -0.7);
  AdamState<double> sa(a, {}), sb(b, {});
  for (int i = 0; i < 5; ++i) {
    adam_step(a, sa);
    adam_step(b, sb);
  }
  EXPECT_NEAR(a[0].value(0, 0) - 0.3, -(b[0].value(0, 0) - 0.3), 1e-12);
}

TEST(AdamProperty, StepBoundedByLearningRate) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const double g = rng.uniform(-100.0, 100.0);
    const double lr = std::pow(10.0, rng.uniform(-5.0, -1.0));
    auto p = single(rng.uniform(-1.0, 1.0), g);
    const double before = p[0].value(0, 0);
    AdamState<double> s(p, {lr, 0.9, 0.999, 1e-8});
    adam_step(p, s);
    ASSERT_LE(std::abs(p[0].value(0, 0) - before), lr * (1.0 + 1e-9));
  }
}

TEST(Adam, LayoutMismatchRejected) {
  auto p = single(1.0, 1.0);
  AdamState<double> s;
  EXPECT_THROW(adam_step(p, s), ShapeError);
}

TEST(GradCheck, Quadratic) {
  auto p = single(0.7, 0.0);
  auto loss = [](ParameterStore<double>& ps, bool with_grad) {
    const double w = ps[0].value(0, 0);
    if (with_grad) ps[0].grad(0, 0) += 6.0 * w;
    return 3.0 * w * w;
  };
  EXPECT_LT(grad_check(loss, p).max_rel_error, 1e-7);
}

TEST(GradCheck, ConstantLossZeroError) {
  auto p = single(0.7, 0.0);
  auto loss = [](ParameterStore<double>&, bool) { return 4.0; };
  const auto r = grad_check(loss, p);
  EXPECT_EQ(r.max_rel_error, 0.0);
  EXPECT_EQ(r.coords_checked, 1u);
}

TEST(GradCheck, NonFiniteLossRaises) {
  auto p = single(0.7, 0.0);
  auto loss = [](ParameterStore<double>&, bool) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(grad_check(loss, p), NonFiniteLoss);
}

TEST(GradCheck, ReportsWrongGradient) {
  auto p = single(0.7, 0.0);
  auto loss = [](ParameterStore<double>& ps, bool with_grad) {
    const double w = ps[0].value(0, 0);
    if (with_grad) ps[0].grad(0, 0) += 5.0 * w;
    return 3.0 * w * w;
  };
  const auto r = grad_check(loss, p);
  EXPECT_GT(r.max_rel_error, 0.05);
  EXPECT_EQ(r.worst_parameter, "w");
}

TEST(GradCheck, ConvolutionalStackMatchesNumeric) {
  LayerGraph g;
  g.add(conv2d_spec("conv", {2, 7, 7}, 3, 3, 2, 1), true);
  g.add(relu_spec("relu", g.layers.back().out_shape));
  g.add(maxpool_spec("pool", g.layers.back().out_shape, 2, 1, 0));
  g.add(residual_spec("res", g.layers.back().out_shape, 4, 2));
  g.add(global_avg_pool_spec("gap", g.layers.back().out_shape));
  g.add(dense_spec("fc", 4, 3));
  g.add(layer_norm_spec("ln", 3));
  auto p = init_parameters<double>(g, 3);
  SequentialNet<double> net(g, p);
  Rng rng(4);
  const MatD x = random_mat(rng, 2, 49);
  const MatD w = random_mat(rng, 1, 3);
  auto loss = [&](ParameterStore<double>& ps, bool with_grad) {
    Tape<double> tape;
    const MatD y = net.forward(ps, x, 0, net.size(), &tape);
    if (with_grad) net.backward(ps, w, 0, net.size(), tape, false);
    return (y.array() * w.array()).sum();
  };
  GradCheckOptions opt;
  opt.eps = 1e-6;
  opt.min_coords = 100000;
  EXPECT_LT(grad_check(loss, p, opt).max_rel_error, 1e-4);
}

TEST(Attention, CausalMaskHidesFuture) {
  LayerGraph g;
  g.add(attention_spec("attn", 8, 2), true);
  const auto p = init_parameters<double>(g, 1);
  const auto h = AttentionHandles::resolve(p, "attn", 2);
  Rng rng(2);
  MatD x = random_mat(rng, 5, 8);
  const MatD y = attention_forward<double>(p, h, x, x, true, nullptr);
  x.row(4) += random_mat(rng, 1, 8);
  const MatD y2 = attention_forward<double>(p, h, x, x, true, nullptr);
  EXPECT_LT((y.topRows(4) - y2.topRows(4)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((y.row(4) - y2.row(4)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Attention, CrossAttentionGradients) {
  LayerGraph g;
  g.add(attention_spec("attn", 6, 3), true);
  auto p = init_parameters<double>(g, 9);
  const auto h = AttentionHandles::resolve(p, "attn", 3);
  Rng rng(8);
  const MatD x = random_mat(rng, 4, 6), mem = random_mat(rng, 3, 6), w = random_mat(rng, 4, 6);
  auto loss = [&](ParameterStore<double>& ps, bool with_grad) {
    AttentionCache<double> c;
    const MatD y = attention_forward(ps, h, x, mem, false, &c);
    if (with_grad) {
      MatD dmem = MatD::Zero(mem.rows(), mem.cols());
      attention_backward(ps, h, c, w, dmem);
    }
    return (y.array() * w.array()).sum();
  };
  GradCheckOptions opt;
  opt.eps = 1e-6;
  opt.min_coords = 100000;
  const auto r = grad_check(loss, p, opt);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "] " << r.worst_analytic << " vs "
                                   << r.worst_numeric;
}

TEST(Softmax, RowsNormalised) {
  Rng rng(1);
  const MatD logits = random_mat(rng, 4, 7) * 20.0;
  const MatD probs = softmax_rows(logits);
  for (Eigen::Index r = 0; r < 4; ++r) EXPECT_NEAR(probs.row(r).sum(), 1.0, 1e-12);
  EXPECT_LT((log_softmax_rows(logits).array().exp() - probs.array()).abs().maxCoeff(), 1e-12);
}

TEST(Checkpoint, RoundTripBitExact) {
  test::TempDir dir;
  LayerGraph g;
  g.add(dense_spec("fc", 5, 3), true);
  g.add(layer_norm_spec("ln", 3));
  auto p = init_parameters<float>(g, 4);
  p[1].value(0, 1) = -0.0f;
  save_checkpoint(dir / "ck", {{"kind", "test"}}, p);
  const auto loaded = load_checkpoint(dir / "ck");
  EXPECT_EQ(loaded.meta["kind"], "test");
  ASSERT_EQ(loaded.params.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(loaded.params[i].name, p[i].name);
    EXPECT_EQ(std::memcmp(loaded.params[i].value.data(), p[i].value.data(), p[i].value.size() * sizeof(float)), 0);
  }
  require_same_layout(loaded.params, p);
  EXPECT_EQ(checkpoint_hash(dir / "ck"), checkpoint_hash(dir / "ck"));
}

TEST(Checkpoint, CorruptionDetected) {
  test::TempDir dir;
  LayerGraph g;
  g.add(dense_spec("fc", 5, 3), true);
  const auto p = init_parameters<float>(g, 4);
  save_checkpoint(dir / "ck", {}, p);
  auto weights = read_file_bytes(dir / "ck" / "weights.bin");
  write_file_bytes(dir / "ck" / "weights.bin", weights.substr(0, weights.size() - 4));
  EXPECT_THROW(load_checkpoint(dir / "ck"), CheckpointError);

  save_checkpoint(dir / "v", {}, p);
  auto meta = nlohmann::json::parse(read_file_bytes(dir / "v" / "meta.json"));
  meta["format_version"] = 99;
  write_file_bytes(dir / "v" / "meta.json", meta.dump());
  EXPECT_THROW(load_checkpoint(dir / "v"), CheckpointError);
  EXPECT_THROW(load_checkpoint(dir / "missing"), CheckpointError);
}

TEST(Checkpoint, LayoutMismatchRejected) {
  LayerGraph a, b;
  a.add(dense_spec("fc", 5, 3), true);
  b.add(dense_spec("fc", 5, 4), true);
  EXPECT_THROW(require_same_layout(init_parameters<float>(a, 0), init_parameters<float>(b, 0)), CheckpointError);
}
