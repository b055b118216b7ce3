#include <gtest/gtest.h>

#include "oto/classifier/knn.hpp"
#include "oto/classifier/losses.hpp"
#include "oto/classifier/model.hpp"
#include "oto/classifier/objective.hpp"
#include "oto/classifier/trainer.hpp"
#include "oto/nn/grad_check.hpp"
#include "support.hpp"

using namespace oto;
using namespace oto::classifier;

namespace {

classifier::ResNetConfig small_config() {
  auto c = test::tiny_resnet();
  c.input_size = 32;
  return c;
}

LabeledTensors random_tensors(int per_class, int classes, int size, std::uint64_t seed) {
  Rng rng(seed);
  LabeledTensors t;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      MatF img(3, size * size);
      for (Eigen::Index j = 0; j < img.size(); ++j) img.data()[j] = static_cast<float>(rng.uniform01() * 0.2 + 0.15 * c);
      t.images.push_back(std::move(img));
      t.labels.push_back(c);
    }
  }
  return t;
}

Eigen::RowVectorXd v(std::initializer_list<double> xs) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) r(i++) = x;
  return r;
}

}  // namespace

TEST(TripletDistances, HandExamples) {
  auto d = triplet_distances(v({0, 0}), v({1, 0}), v({0, 2}));
  EXPECT_DOUBLE_EQ(d.phi, 1.0);
  EXPECT_DOUBLE_EQ(d.psi, 4.0);
  d = triplet_distances(v({1, 1}), v({1, 1}), v({4, 5}));
  EXPECT_DOUBLE_EQ(d.phi, 0.0);
  EXPECT_DOUBLE_EQ(d.psi, 25.0);
  d = triplet_distances(v({3, 3}), v({3, 3}), v({3, 3}));
  EXPECT_EQ(d.phi, 0.0);
  EXPECT_EQ(d.psi, 0.0);
  EXPECT_THROW(triplet_distances(v({1}), v({1, 2}), v({1, 2})), ShapeError);
}

TEST(TripletLoss, HandExamples) {
  const std::vector<TripletDistances> a{{0.1, 1.0}}, b{{4.0, 1.0}}, c{{0.0, 0.0}};
  EXPECT_DOUBLE_EQ(triplet_loss(a, 0.2), 0.0);
  EXPECT_NEAR(triplet_loss(b, 0.2), 3.2, 1e-12);
  EXPECT_NEAR(triplet_loss(c, 0.2), 0.2, 1e-12);
  const std::vector<TripletDistances> both{{4.0, 1.0}, {0.0, 0.0}};
  EXPECT_NEAR(triplet_loss(both, 0.2, TripletReduction::Mean), 1.7, 1e-12);
  EXPECT_NEAR(triplet_loss(both, 0.2, TripletReduction::Sum), 3.4, 1e-12);
  EXPECT_THROW(triplet_loss(both, -0.1), InvalidArgument);
}

TEST(TripletLossProperty, Hinge) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<TripletDistances> batch(1 + rng.uniform_index(8));
    const double alpha = rng.uniform(0.0, 1.0);
    bool all_satisfied = true;
    for (auto& d : batch) {
      d.phi = rng.uniform(0.0, 3.0);
      d.psi = rng.uniform(0.0, 3.0);
      all_satisfied = all_satisfied && d.psi >= d.phi + alpha;
    }
    const double l = triplet_loss(batch, alpha);
    if (all_satisfied) {
      ASSERT_EQ(l, 0.0);
    } else {
      ASSERT_GT(l, 0.0);
    }
  }
}

TEST(CrossEntropy, HandExamples) {
  const auto misc = test::fixture_json("misc.json");
  const std::vector<int> label0{0};
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(5);
  p(0) = 1.0;
  EXPECT_DOUBLE_EQ(cross_entropy_loss(p, label0), 0.0);
  EXPECT_NEAR(cross_entropy_loss(Eigen::RowVectorXd::Constant(5, 0.2), label0), misc["ln5"].get<double>(), 1e-12);
  p.setConstant(0.125);
  p(0) = 0.5;
  EXPECT_NEAR(cross_entropy_loss(p, label0), misc["ln2"].get<double>(), 1e-12);
  p.setZero();
  p(1) = 1.0;
  EXPECT_NEAR(cross_entropy_loss(p, label0), -std::log(1e-12), 1e-9);
}

TEST(CombinedLoss, Additivity) {
  EXPECT_EQ(combined_loss(0.0, 0.0).total, 0.0);
  EXPECT_NEAR(combined_loss(3.2, 0.69315).total, 3.89315, 1e-12);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.uniform(0, 5), c = rng.uniform(0, 5);
    const auto b = combined_loss(t, c);
    ASSERT_NEAR(b.total, b.triplet + b.cross_entropy, 1e-9);
    ASSERT_EQ(b.margin, kDefaultMargin);
  }
}

TEST(Softmax, ExamplesAndTieBreak) {
  const auto misc = test::fixture_json("misc.json");
  const auto uniform = softmax_probabilities(RowVecD::Zero(5));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(uniform(i), 0.2, 1e-15);
  EXPECT_EQ(argmax_lowest(uniform), 0);
  RowVecD logits = RowVecD::Zero(5);
  logits(0) = 10.0;
  const auto p = softmax_probabilities(logits);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(p(i), misc["softmax_10_0_0_0_0"][i].get<double>(), 1e-12);
  EXPECT_EQ(argmax_lowest(p), 0);
  RowVecD tie(5);
  tie << 0, 3, 1, 3, 2;
  EXPECT_EQ(argmax_lowest(tie), 1);
}

TEST(SoftmaxProperty, NormalisedAndShiftInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    RowVecD z(5);
    for (int i = 0; i < 5; ++i) z(i) = rng.uniform(-30, 30);
    const auto p = softmax_probabilities(z);
    ASSERT_NEAR(p.sum(), 1.0, 1e-6);
    ASSERT_GE(p.minCoeff(), 0.0);
    ASSERT_EQ(argmax_lowest(softmax_probabilities((z.array() + rng.uniform(-100, 100)).matrix())), argmax_lowest(p));
  }
}

TEST(Knn, Examples) {
  Eigen::MatrixXd train(3, 1);
  train << 0, 1, 10;
  const std::vector<int> labels{0, 0, 1};
  Eigen::MatrixXd q(1, 1);
  q << 9;
  EXPECT_EQ(knn_baseline(train, labels, q, 3)[0], 0);
  EXPECT_EQ(knn_baseline(train, labels, q, 1)[0], 1);
  q << 1;
  EXPECT_EQ(knn_baseline(train, labels, q, 1)[0], 0);
}

TEST(Knn, TieResolvedByMeanDistanceThenCode) {
  Eigen::MatrixXd train(4, 1);
  train << 0, 1, 5, 7;
  const std::vector<int> labels{1, 1, 0, 0};
  Eigen::MatrixXd q(1, 1);
  q << 4;  // class 1 mean 3.5, class 0 mean 2
  EXPECT_EQ(knn_baseline(train, labels, q, 4)[0], 0);
  q << 3.5;  // both means 2.5 -> lower code
  EXPECT_EQ(knn_baseline(train, labels, q, 4)[0], 0);
  q << 3;  // class 1 mean 2.5, class 0 mean 3
  EXPECT_EQ(knn_baseline(train, labels, q, 4)[0], 1);
}

TEST(Knn, Errors) {
  Eigen::MatrixXd empty(0, 2), q(1, 2);
  q.setZero();
  EXPECT_THROW(knn_baseline(empty, std::span<const int>(), q, 1), EmptyTrainSet);
  Eigen::MatrixXd train = Eigen::MatrixXd::Zero(2, 2);
  const std::vector<int> labels{0, 1};
  EXPECT_THROW(knn_baseline(train, labels, q, 3), InvalidArgument);
}

TEST(Encode, ShapeDeterminismAndErrors) {
  const auto model = ClassifierModel::initialize(small_config(), 4);
  const auto t = random_tensors(1, 1, 32, 5);
  const auto e1 = model.encode(t.images[0]);
  EXPECT_EQ(e1.size(), 8);
  EXPECT_TRUE(e1.allFinite());
  EXPECT_EQ(e1, model.encode(t.images[0]));
  EXPECT_THROW(model.encode(MatF::Zero(3, 31 * 31)), ShapeError);
  const auto pred = model.classify(t.images[0]);
  EXPECT_NEAR(pred.probabilities.sum(), 1.0, 1e-6);
  EXPECT_EQ(pred.class_code, argmax_lowest(pred.probabilities));
}

TEST(Encode, DefaultEmbeddingIs128) {
  const auto model = ClassifierModel::initialize(ResNetConfig{}, 0);
  const auto e = model.encode(MatF::Constant(3, 226 * 226, 0.5f));
  EXPECT_EQ(e.size(), 128);
  EXPECT_TRUE(e.allFinite());
}

TEST(Objective, GradientsMatchFiniteDifferences) {
  auto cfg = small_config();
  cfg.input_size = 12;
  cfg.stem_stride = 1;
  cfg.stem_kernel = 3;
  cfg.num_classes = 3;
  const ResNet<double> net(cfg, nn::init_parameters<double>(build_resnet_graph(cfg), 1));
  auto params = nn::init_parameters<double>(build_resnet_graph(cfg), 1);
  Rng rng(2);
  std::vector<MatD> imgs(6);
  for (auto& m : imgs) {
    m.resize(3, 144);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform01();
  }
  const std::vector<TrainSample<double>> batch{
      {&imgs[0], 0, &imgs[1], &imgs[2]}, {&imgs[2], 1, &imgs[3], &imgs[4]}, {&imgs[4], 2, &imgs[5], &imgs[0]}};
  for (auto mode : {LossMode::Combined, LossMode::CrossEntropy, LossMode::Triplet}) {
    auto loss = [&](nn::ParameterStore<double>& p, bool g) {
      return batch_objective<double>(net, p, batch, mode, 0.2, TripletReduction::Mean, g).total;
    };
    nn::GradCheckOptions opt;
    opt.eps = 1e-5;
    opt.min_coords = 300;
    opt.seed = 3;
    EXPECT_LT(nn::grad_check(loss, params, opt).max_rel_error, 1e-4) << to_string(mode);
  }
}

TEST(Objective, PermutationInvariant) {
  const auto cfg = small_config();
  const ResNet<double> net(cfg, nn::init_parameters<double>(build_resnet_graph(cfg), 1));
  auto params = nn::init_parameters<double>(build_resnet_graph(cfg), 1);
  std::vector<MatD> imgs;
  for (const auto& m : random_tensors(2, 2, 32, 9).images) imgs.push_back(m.cast<double>());
  std::vector<TrainSample<double>> batch{
      {&imgs[0], 0, &imgs[1], &imgs[2]}, {&imgs[2], 1, &imgs[3], &imgs[0]}, {&imgs[1], 0, &imgs[0], &imgs[3]}};
  const auto a = batch_objective<double>(net, params, batch, LossMode::Combined, 0.2, TripletReduction::Mean, false);
  std::reverse(batch.begin(), batch.end());
  const auto b = batch_objective<double>(net, params, batch, LossMode::Combined, 0.2, TripletReduction::Mean, false);
  EXPECT_NEAR(a.triplet, b.triplet, 1e-9);
  EXPECT_NEAR(a.cross_entropy, b.cross_entropy, 1e-9);
  EXPECT_NEAR(a.total, a.triplet + a.cross_entropy, 1e-9);
}

TEST(Train, ZeroEpochsReturnsInitialised) {
  ClassifierTrainConfig c;
  c.epochs = 0;
  c.model = small_config();
  c.seed = 6;
  const auto r = train_classifier(LabeledTensors{}, LabeledTensors{}, c);
  EXPECT_TRUE(r.history.empty());
  const auto init = ClassifierModel::initialize(c.model, 6);
  for (std::size_t i = 0; i < init.params().size(); ++i) EXPECT_EQ(r.model.params()[i].value, init.params()[i].value);
}

TEST(Train, SameSeedSameHistory) {
  ClassifierTrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  c.model = small_config();
  c.seed = 2;
  const auto train = random_tensors(3, 5, 32, 1), val = random_tensors(1, 5, 32, 2);
  const auto a = train_classifier(train, val, c), b = train_classifier(train, val, c);
  ASSERT_EQ(a.history.size(), 2u);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  for (const auto& r : a.history) EXPECT_NEAR(r.total_loss, r.triplet_loss + r.ce_loss, 1e-9);
  std::ostringstream csv;
  write_history_csv(csv, a.history);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "epoch,triplet_loss,ce_loss,total_loss,val_macro_f1");
}

TEST(Train, RejectsEmptyTrainAndBadConfig) {
  ClassifierTrainConfig c;
  c.epochs = 1;
  c.model = small_config();
  EXPECT_THROW(train_classifier(LabeledTensors{}, LabeledTensors{}, c), EmptyTrainSet);
  c.batch_size = 0;
  EXPECT_THROW(train_classifier(random_tensors(2, 2, 32, 1), LabeledTensors{}, c), InvalidArgument);
}

TEST(Train, DivergenceAbortsWithDiagnostic) {
  ClassifierTrainConfig c;
  c.epochs = 3;
  c.batch_size = 2;
  c.learning_rate = 1e38;
  c.loss = LossMode::CrossEntropy;
  c.model = small_config();
  try {
    train_classifier(random_tensors(4, 5, 32, 1), LabeledTensors{}, c);
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  test::TempDir dir;
  const auto model = ClassifierModel::initialize(small_config(), 11);
  model.save(dir / "ck");
  const auto back = ClassifierModel::load(dir / "ck");
  EXPECT_EQ(back.config(), model.config());
  const auto t = random_tensors(1, 3, 32, 4);
  for (const auto& img : t.images) {
    EXPECT_EQ(back.encode(img), model.encode(img));
    EXPECT_EQ(classify(img, dir / "ck").probabilities, model.classify(img).probabilities);
  }
  EXPECT_THROW(ClassifierModel::load(dir / "missing"), CheckpointError);
}

TEST(Geometry, IntraInterMeans) {
  Eigen::MatrixXd e(4, 1);
  e << 0, 1, 10, 11;
  const std::vector<int> labels{0, 0, 1, 1};
  const auto g = embedding_geometry(e, labels);
  EXPECT_LT(g.mean_intra, g.mean_inter);
}
