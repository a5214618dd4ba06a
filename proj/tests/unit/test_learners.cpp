// Copyright 2026 The dlflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "common/error.hpp"
#include "learners/mlp_learners.hpp"
#include "learners/porter_stemmer.hpp"
#include "learners/synth.hpp"
#include "learners/synthetic_curve.hpp"
#include "test_util.hpp"

namespace dlflow::learners {
namespace {

std::vector<Example> examples_of(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({xs[i], ys[i]});
  return out;
}

Dataset text_dataset(int per_class, uint64_t seed) {
  CorpusOptions o;
  o.docs_per_class = per_class;
  o.seed = seed;
  o.short_fraction = 0;
  o.invalid_utf8_fraction = 0;
  Dataset d;
  d.repo = "corpus";
  for (const auto& [path, text] : synth_corpus(o)) {
    d.files.push_back({path, sha256_hex(text), text, path.substr(0, path.find('/'))});
  }
  return d;
}

Dataset image_dataset(const std::vector<Image>& images, int classes) {
  Dataset d;
  std::string names;
  for (int i = 0; i < classes; ++i) names += std::string(kFashionClasses[static_cast<std::size_t>(i)]) + "\n";
  for (const auto& [p, c] : std::map<std::string, std::string>{
           {"classes.txt", names}, {"images.idx3", encode_idx_images(images)}, {"labels.idx1", encode_idx_labels(images)}}) {
    d.files.push_back({p, sha256_hex(c), c, std::nullopt});
  }
  return d;
}

TEST(Porter, MatchesReferenceImplementation) {
  std::ifstream in(testing::fixture("porter.tsv"));
  std::string word, stem;
  int n = 0;
  while (in >> word >> stem) {
    EXPECT_EQ(porter_stem(word), stem) << word;
    ++n;
  }
  EXPECT_GE(n, 100);
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("sky"), "sky");
  EXPECT_EQ(porter_stem("a"), "a");
  EXPECT_EQ(porter_stem("x1y"), "x1y");
}

TEST(TextFeatures, TokenizeAndVectorize) {
  EXPECT_EQ(tokenize("Running, RUNS!"), (std::vector<std::string>{"run", "run"}));
  const Vocabulary v({"cat", "dog", "run"});
  EXPECT_EQ(vectorize_text("", v), std::vector<double>(3, 0.0));
  EXPECT_EQ(vectorize_text("dog dog dog", v), (std::vector<double>{0, 3, 0}));
  EXPECT_EQ(vectorize_text("cats run dog", v), vectorize_text("dog run cats", v));
  EXPECT_EQ(vectorize_text("zebra", v), std::vector<double>(3, 0.0));
  EXPECT_EQ(v.index_of("run"), 2);
  EXPECT_EQ(v.index_of("zzz"), -1);
}

TEST(TextFeatures, VocabularyOrderAndRoundTrip) {
  const auto v = Vocabulary::build({{"b", "a", "b"}, {"c", "a", "b"}, {"d"}}, 3);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(Vocabulary::deserialize(v.serialize()).tokens(), v.tokens());
  const LabelEncoding enc({"tech", "sport", "business", "sport"});
  EXPECT_EQ(enc.names(), (std::vector<std::string>{"business", "sport", "tech"}));
  EXPECT_EQ(enc.encode("tech"), 2);
  EXPECT_EQ(enc.decode(1), "sport");
  EXPECT_EQ(LabelEncoding::deserialize(enc.serialize()).names(), enc.names());
}

TEST(Mlp, LossTraceMatchesReference) {
  const json ref = read_json(testing::fixture("mlp_trace.json"));
  Mlp net(MlpSpec{ref.at("dims").get<std::vector<std::size_t>>(), ref.at("layer_norm").get<bool>(), 0.0});
  const auto init = ref.at("initial_params").get<std::vector<double>>();
  ASSERT_EQ(init.size(), net.params().size());
  std::copy(init.begin(), init.end(), net.params().begin());
  const auto xs = ref.at("inputs").get<std::vector<std::vector<double>>>();
  const auto batch = examples_of(xs, ref.at("labels").get<std::vector<int>>());
  const auto losses = ref.at("losses").get<std::vector<double>>();
  Rng rng(0);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const double loss = net.train_step(batch, ref.at("learning_rate").get<double>(), rng);
    EXPECT_NEAR(loss, losses[i], 1e-12) << "step " << i;
    if (i > 0) EXPECT_LT(losses[i], losses[i - 1]);
  }
  const auto probs = ref.at("final_probs").get<std::vector<std::vector<double>>>();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = net.predict_proba(xs[i]);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], probs[i][k], 1e-12);
  }
}

double max_relative_gradient_error(const MlpSpec& spec, uint64_t seed) {
  Mlp net(spec);
  Rng rng(seed);
  net.init(rng);
  for (auto& p : net.params()) p += 0.1 * (rng.uniform01() - 0.5);
  std::vector<double> x(spec.dims.front());
  for (auto& v : x) v = rng.uniform01() * 2 - 1;
  const std::vector<Example> batch{{x, static_cast<int>(rng.uniform_index(spec.dims.back()))}};
  std::vector<double> grad(net.params().size());
  net.gradient(batch, grad, nullptr);
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + h;
    const double up = net.loss(batch);
    net.params()[i] = keep - h;
    const double down = net.loss(batch);
    net.params()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
  }
  return worst;
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  EXPECT_LT(max_relative_gradient_error({{4, 6, 3}, false, 0.0}, 1), 1e-4);
  EXPECT_LT(max_relative_gradient_error({{5, 7, 6, 4}, true, 0.0}, 2), 1e-4);
  EXPECT_LT(max_relative_gradient_error({{3, 20, 2}, true, 0.5}, 3), 1e-4);
}

TEST(Mlp, ZeroLearningRateIsNoOp) {
  Mlp net({{3, 5, 2}, true, 0.2});
  Rng rng(4);
  net.init(rng);
  const Mlp before = net;
  const std::vector<double> x{1, 2, 3};
  const std::vector<Example> batch{{x, 1}};
  net.train_step(batch, 0.0, rng);
  EXPECT_TRUE(net == before);
}

TEST(Mlp, ShapeMismatchAndSoftmax) {
  Mlp net({{3, 4, 5}, false, 0.0});
  Rng rng(9);
  net.init(rng);
  const std::vector<double> wrong{1, 2};
  try {
    (void)net.predict_proba(wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{rng.uniform01() * 100, -rng.uniform01(), rng.uniform01()};
    const auto p = net.predict_proba(x);
    double sum = 0;
    for (double v : p) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Mlp, PruneCountsAndFreezes) {
  Mlp net({{5, 2}, false, 0.0});
  Rng rng(1);
  net.init(rng);
  ASSERT_EQ(net.weight_count(), 10u);
  const Mlp before = net;
  net.prune_magnitude(0.0);
  EXPECT_TRUE(net == before);
  net.prune_magnitude(0.5);
  EXPECT_EQ(net.zero_weight_count(), 5u);
  const std::vector<double> x{1, -1, 2, 0.5, 3};
  const std::vector<Example> batch{{x, 0}};
  for (int i = 0; i < 5; ++i) net.train_step(batch, 0.5, rng);
  EXPECT_GE(net.zero_weight_count(), 5u);
  Mlp big({{10, 7, 3}, true, 0.0});
  big.init(rng);
  big.prune_magnitude(0.3);
  EXPECT_EQ(big.zero_weight_count(), static_cast<std::size_t>(0.3 * 91));
  EXPECT_THROW(big.prune_magnitude(1.0), Error);
}

TEST(Mlp, SerializationRoundTrip) {
  Mlp net({{6, 4, 4, 3}, true, 0.1});
  Rng rng(3);
  net.init(rng);
  net.prune_magnitude(0.25);
  const Mlp back = Mlp::deserialize(net.serialize());
  EXPECT_TRUE(back == net);
  EXPECT_EQ(back.serialize(), net.serialize());
  EXPECT_THROW(Mlp::deserialize("garbage"), Error);
}

TEST(Mlp, SeededTrainingIsBitIdentical) {
  auto run = [] {
    Mlp net({{4, 8, 3}, true, 0.3});
    Rng rng(21);
    net.init(rng);
    const std::vector<double> a{1, 0, 0, 1}, b{0, 1, 1, 0};
    const std::vector<Example> batch{{a, 0}, {b, 2}};
    for (int i = 0; i < 25; ++i) net.train_step(batch, 0.1, rng);
    return net.serialize();
  };
  EXPECT_EQ(run(), run());
}

TEST(Synth, CorpusIsDeterministic) {
  CorpusOptions o;
  o.seed = 5;
  const auto a = synth_corpus(o);
  EXPECT_EQ(a, synth_corpus(o));
  EXPECT_EQ(a.size(), 500u);
  for (const auto& [p, t] : a) {
    const auto cat = p.substr(0, p.find('/'));
    EXPECT_NE(std::find(kNewsCategories.begin(), kNewsCategories.end(), cat), kNewsCategories.end());
    EXPECT_TRUE(p.ends_with(".txt"));
  }
}

TEST(Synth, ImagesAndIdxRoundTrip) {
  const auto imgs = synth_images(10, 4, 8);
  ASSERT_EQ(imgs.size(), 40u);
  const auto back = decode_idx(encode_idx_images(imgs), encode_idx_labels(imgs));
  ASSERT_EQ(back.size(), imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    EXPECT_EQ(back[i].label, imgs[i].label);
    EXPECT_EQ(back[i].pixels, imgs[i].pixels);
  }
  const auto again = synth_images(10, 4, 8);
  EXPECT_EQ(again[7].pixels, imgs[7].pixels);
  EXPECT_THROW(decode_idx("xx", "yy"), Error);
}

TEST(ImageFeatures, ScaledByTwoFiftyFive) {
  const std::vector<uint8_t> px{0, 51, 255};
  EXPECT_EQ(image_features(px), (std::vector<double>{0.0, 51.0 / 255.0, 1.0}));
}

TEST(TextLearner, FiveLinearLayersAndLearns) {
  TextMlpLearner l;
  l.init({{"hidden", 16}, {"lr", 0.1}, {"vocab_size", 300}}, 3);
  l.load_data(text_dataset(30, 1));
  EXPECT_EQ(l.model().linear_layers(), 5u);
  EXPECT_EQ(l.describe().at("linear_layers"), 5);
  for (const auto& L : std::span(l.model().layout()).first(4)) EXPECT_TRUE(L.norm);
  const double before = l.evaluate().at("loss");
  l.train(150);
  const auto m = l.evaluate();
  EXPECT_LT(m.at("loss"), before);
  EXPECT_EQ(l.evaluate(), m);

  TextMlpLearner restored;
  restored.restore(l.save());
  const auto holdout = text_dataset(5, 99);
  EXPECT_EQ(restored.evaluate_dataset(holdout), l.evaluate_dataset(holdout));
  EXPECT_EQ(restored.predict_scores(holdout.files[0].content), l.predict_scores(holdout.files[0].content));
}

TEST(ImageLearner, ArchitectureAndPruneRetrain) {
  ImageMlpLearner l;
  l.init({{"hidden", 32}, {"lr", 0.1}}, 7);
  l.load_data(image_dataset(synth_images(10, 30, 1), 10));
  EXPECT_EQ(l.model().linear_layers(), 2u);
  EXPECT_EQ(l.model().input_dim(), 784u);
  EXPECT_EQ(l.model().output_dim(), 10u);
  l.train(150);
  const double unpruned = l.evaluate().at("accuracy");
  EXPECT_GT(unpruned, 0.9);
  l.compress(0.5, 50);
  EXPECT_GE(l.model().zero_weight_count(), l.model().weight_count() / 2);
  EXPECT_GE(l.evaluate().at("accuracy"), unpruned - 0.05);
}

TEST(ImageLearner, UniformScoresTieToClassZero) {
  ImageMlpLearner l;
  l.init({{"hidden", 4}}, 1);
  l.load_data(image_dataset(synth_images(5, 6, 2), 5));
  for (auto& p : l.mutable_model().params()) p = 0.0;
  std::vector<Image> eval;
  for (int label : {0, 3, 0, 1, 4, 0, 2, 2}) eval.push_back(Image{label, {}});
  const auto m = l.evaluate_dataset(image_dataset(eval, 5));
  EXPECT_DOUBLE_EQ(m.at("accuracy"), 3.0 / 8.0);
  EXPECT_NEAR(m.at("loss"), std::log(5.0), 1e-12);
}

TEST(ImageLearner, EmptyEvaluationFails) {
  ImageMlpLearner l;
  l.init(json::object(), 1);
  l.load_data(image_dataset(synth_images(3, 6, 2), 3));
  try {
    (void)l.evaluate_dataset(image_dataset({}, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
}

TEST(SyntheticCurve, FollowsClosedForm) {
  SyntheticCurveLearner l;
  l.init({{"a", 0.9}, {"b", 0.2}}, 0);
  l.train(5);
  EXPECT_DOUBLE_EQ(l.evaluate().at("accuracy"), 0.9 * (1 - std::exp(-1.0)));
  EXPECT_DOUBLE_EQ(SyntheticCurveLearner::accuracy_at(0.9, 0.2, 5), l.evaluate().at("accuracy"));
}

TEST(Registry, Builtins) {
  const auto reg = LearnerRegistry::with_builtins();
  EXPECT_EQ(reg.ids(), (std::vector<std::string>{"image-mlp", "synthetic-curve", "text-mlp-5"}));
  EXPECT_EQ(reg.create("image-mlp")->id(), "image-mlp");
  EXPECT_THROW((void)reg.create("nope"), Error);
}

}  // namespace
}  // namespace dlflow::learners
