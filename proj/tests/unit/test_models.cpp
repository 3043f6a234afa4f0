#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "../support/gradcheck.hpp"
#include "../support/tempdir.hpp"
#include "edakd/distill/losses.hpp"
#include "edakd/errors.hpp"
#include "edakd/models/archive.hpp"
#include "edakd/models/inference.hpp"
#include "edakd/models/model.hpp"
#include "edakd/models/profile.hpp"
#include "edakd/signal/synth.hpp"
#include "edakd/tensor/optim.hpp"

namespace {

using namespace edakd;
using namespace edakd::models;
using edakd::testing::random_tensor;

std::vector<double> eda(std::uint64_t seed) {
  signal::SynthConfig cfg;
  cfg.duration_s = 128;
  cfg.seed = seed;
  return signal::synthesize_eda(cfg).samples;
}

const ModelGraph& teacher() {
  static const ModelGraph t = build_teacher(teacher_config(), 1);
  return t;
}
const ModelGraph& student() {
  static const ModelGraph s = build_student(student_config(), 2);
  return s;
}

ParameterSet film_params(std::size_t c, std::mt19937_64& rng, bool zero) {
  ParameterSet ps;
  for (const char* leaf : {"w_gamma", "b_gamma", "w_beta", "b_beta"}) {
    const bool w = leaf[0] == 'w';
    tensor::Shape shape = w ? tensor::Shape{c, 1} : tensor::Shape{c};
    ps.add(std::string("f.") + leaf, zero ? Tensor(shape) : random_tensor(shape, rng));
  }
  return ps;
}

TEST(Film, FreshLayerIsIdentity) {
  std::mt19937_64 rng(1);
  const auto ps = film_params(4, rng, true);
  const Tensor x = random_tensor({4, 9}, rng);
  Graph g(false);
  const auto y = film_modulate(g, g.constant(x), {3.7, 0.4}, ps, "f").value();
  EXPECT_EQ(y, x);
}

TEST(Film, BetaRowShift) {
  std::mt19937_64 rng(2);
  auto ps = film_params(3, rng, true);
  const auto wb = *ps.find("f.w_beta");
  const auto bb = *ps.find("f.b_beta");
  for (std::size_t c = 0; c < 3; ++c) {
    ps[wb].tensor[c] = 1.0;
    ps[bb].tensor[c] = 0.25 * c;
  }
  const Tensor x = random_tensor({3, 5}, rng);
  Graph g(false);
  const auto y = film_modulate(g, g.constant(x), {1.0, 2.0}, ps, "f").value();
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < 5; ++t) EXPECT_DOUBLE_EQ(y[c * 5 + t], x[c * 5 + t] + 2.0 + 0.25 * c);
  }
}

TEST(Film, ParameterGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  auto ps = film_params(4, rng, false);
  const Tensor x = random_tensor({4, 6}, rng);
  const Tensor target = random_tensor({4, 6}, rng);
  const signal::NormStats stats{1.3, 0.7};
  auto loss = [&](Graph& g) {
    return ops::mse(film_modulate(g, g.constant(x), stats, ps, "f"), g.constant(target));
  };
  Graph g(true);
  const auto l = loss(g);
  g.backward(l);
  std::vector<std::vector<double>> analytic(ps.size());
  g.for_each_parameter_grad([&](const ParameterSet&, std::size_t i, std::span<const double> gr) {
    analytic[i].assign(gr.begin(), gr.end());
  });
  const double h = 1e-5;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ASSERT_EQ(analytic[i].size(), ps[i].tensor.size()) << ps[i].name;
    double d2 = 0, a2 = 0, n2 = 0;
    for (std::size_t j = 0; j < ps[i].tensor.size(); ++j) {
      const double orig = ps[i].tensor[j];
      ps[i].tensor[j] = orig + h;
      Graph gp(false);
      const double lp = loss(gp).value()[0];
      ps[i].tensor[j] = orig - h;
      Graph gm(false);
      const double lm = loss(gm).value()[0];
      ps[i].tensor[j] = orig;
      const double num = (lp - lm) / (2 * h);
      d2 += (num - analytic[i][j]) * (num - analytic[i][j]);
      a2 += analytic[i][j] * analytic[i][j];
      n2 += num * num;
    }
    EXPECT_LT(std::sqrt(d2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-12), 1e-4) << ps[i].name;
  }
}

TEST(Teacher, ShapesAndTaps) {
  const auto& t = teacher();
  Graph g(false);
  const auto x = signal::normalize(eda(1));
  const auto r = t.forward(g, g.constant(Tensor({1, 512}, x.values)), x.stats);
  EXPECT_EQ(r.output.shape(), (tensor::Shape{1, 512}));
  const auto& ch = t.config().encoder_channels;
  for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
    EXPECT_EQ(r.taps[i].shape(), (tensor::Shape{ch[i], 512u >> (i + 1)}));
  }
  EXPECT_EQ(r.taps[4].shape()[1], 16u);  // bottleneck sequence length
}

TEST(Teacher, ParameterCountNearReference) {
  const auto n = teacher().params().scalar_count();
  EXPECT_NEAR(static_cast<double>(n), 2.063e6, 0.15 * 2.063e6);
}

TEST(Student, ShapesCountAndRatio) {
  const auto& s = student();
  const auto& t = teacher();
  for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
    EXPECT_EQ(2 * s.config().encoder_channels[i], t.config().encoder_channels[i]);
  }
  const auto out = s.predict_normalized(signal::normalize(eda(2)).values, {4.0, 0.5});
  EXPECT_EQ(out.size(), 512u);
  const auto n = s.params().scalar_count();
  EXPECT_NEAR(static_cast<double>(n), 1.35e5, 0.30 * 1.35e5);
  EXPECT_LT(n * 10, t.params().scalar_count());
  for (const auto& p : s.params()) EXPECT_EQ(p.name.find("bottleneck"), std::string::npos);
}

TEST(Student, UsesSeparableEncoder) {
  const auto& s = student();
  EXPECT_TRUE(s.params().find("enc1.conv1.dw.weight").has_value());
  EXPECT_TRUE(s.params().find("enc1.conv1.pw.weight").has_value());
  EXPECT_FALSE(s.params().find("enc1.conv1.weight").has_value());
}

TEST(Student, FilmToggle) {
  const auto no_film = build_student(student_config(teacher_config(), false), 2);
  EXPECT_FALSE(no_film.params().find("enc1.film.w_gamma").has_value());
  EXPECT_TRUE(student().params().find("enc1.film.w_gamma").has_value());
}

TEST(Models, FilmInitIdentityProperty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const auto x = signal::normalize(eda(10 + trial));
    const signal::NormStats stats{5.0 + trial, 0.3 * (trial + 1)};
    for (const ModelGraph* m : {&teacher(), &student()}) {
      EXPECT_EQ(m->predict_normalized(x.values, stats), m->predict_normalized(x.values, stats, {true}));
    }
  }
}

TEST(Models, ForwardIsPure) {
  const auto x = signal::normalize(eda(5));
  EXPECT_EQ(teacher().predict_normalized(x.values, x.stats), teacher().predict_normalized(x.values, x.stats));
  const auto again = build_teacher(teacher_config(), 1);
  EXPECT_EQ(teacher().predict_normalized(x.values, x.stats), again.predict_normalized(x.values, x.stats));
}

TEST(Models, InvalidConfig) {
  auto cfg = teacher_config();
  cfg.input_length = 500;
  EXPECT_THROW(build_teacher(cfg), ConfigError);
  cfg = teacher_config();
  cfg.heads = 3;
  EXPECT_THROW(build_teacher(cfg), ConfigError);
  Graph g(false);
  EXPECT_THROW(teacher().forward(g, g.constant(Tensor({1, 256})), {}), ShapeError);
}

TEST(Denoise, UntrainedAndConstantInputsAreFinite) {
  for (const ModelGraph* m : {&teacher(), &student()}) {
    const auto y = denoise(*m, eda(6));
    ASSERT_EQ(y.size(), 512u);
    for (double v : y) EXPECT_TRUE(std::isfinite(v));
    const auto c = denoise(*m, std::vector<double>(512, 3.0));
    for (double v : c) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Denoise, BatchMatchesSingle) {
  std::vector<std::vector<double>> in{eda(1), eda(2), eda(3)};
  const auto a = denoise_all(student(), in, 1);
  const auto b = denoise_all(student(), in, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[1], denoise(student(), in[1]));
}

TEST(Profile, SizeFormulaAndRounding) {
  EXPECT_DOUBLE_EQ(round2(size_mb(2063000)), 7.87);
  EXPECT_DOUBLE_EQ(round2(size_mb(135000)), 0.51);
  for (const ModelGraph* m : {&teacher(), &student()}) {
    const auto r = profile(*m);
    EXPECT_EQ(r.size_mb, 4.0 * r.param_count / 1048576.0);
    EXPECT_EQ(r.flops, 2 * r.macs);
    EXPECT_EQ(r.param_count, m->params().scalar_count());
    std::uint64_t brute = 0, layer_params = 0, layer_macs = 0;
    for (const auto& p : m->params()) brute += p.tensor.size();
    for (const auto& l : r.layers) layer_params += l.params, layer_macs += l.macs;
    EXPECT_EQ(brute, r.param_count);
    EXPECT_EQ(layer_params, r.param_count);
    EXPECT_EQ(layer_macs, r.macs);
  }
}

TEST(Profile, SingleConvHandCount) {
  Graph g(false);
  g.enable_mac_counting(true);
  {
    tensor::ScopeGuard s(g, "conv");
    ops::conv1d(g.constant(Tensor({2, 12})), g.constant(Tensor({4, 2, 3})), std::nullopt, {});
  }
  ASSERT_EQ(g.mac_records().size(), 1u);
  EXPECT_EQ(g.mac_records()[0].macs, 240u);
}

TEST(Profile, FlopsRatioInBand) {
  const double ratio = static_cast<double>(profile(teacher()).flops) / profile(student()).flops;
  EXPECT_GE(ratio, 6.0);
  EXPECT_LE(ratio, 12.0);
}

TEST(Profile, MacsMatchClosedFormForTeacherEncoderConv) {
  const auto r = profile(teacher());
  for (const auto& l : r.layers) {
    if (l.name == "enc1.conv1") EXPECT_EQ(l.macs, 3u * 1 * 16 * 256);
    if (l.name == "head") EXPECT_EQ(l.macs, 16u * 512);
  }
}

TEST(Archive, RoundTripIsBitExact) {
  edakd::testing::TempDir dir;
  for (const ModelGraph* m : {&teacher(), &student()}) {
    save_model(dir / "m.edaw", *m);
    const auto loaded = load_model(dir / "m.edaw");
    EXPECT_EQ(loaded.config().kind, m->config().kind);
    EXPECT_EQ(loaded.config().encoder_channels, m->config().encoder_channels);
    ASSERT_EQ(loaded.params().size(), m->params().size());
    for (std::size_t i = 0; i < m->params().size(); ++i) {
      const auto& a = m->params()[i].tensor;
      const auto& b = loaded.params()[i].tensor;
      for (std::size_t j = 0; j < a.size(); ++j) {
        ASSERT_EQ(static_cast<float>(a[j]), b[j]);
      }
    }
    save_model(dir / "m2.edaw", loaded);
    std::ifstream f1(dir / "m.edaw", std::ios::binary), f2(dir / "m2.edaw", std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    EXPECT_EQ(s1, s2);
    EXPECT_EQ(s1.substr(0, 4), "EDAW");
  }
}

TEST(Archive, Float64AndCorruption) {
  edakd::testing::TempDir dir;
  const std::vector<ArchiveTensor> ts{{"a", {2, 2}, DType::float64, {0.1, 0.2, 0.3, 1.0 / 3}},
                                      {"b", {3}, DType::float32, {1, 2, 3}}};
  write_archive(dir / "x.edaw", ts);
  const auto back = read_archive(dir / "x.edaw");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].values, ts[0].values);
  EXPECT_EQ(back[1].shape, ts[1].shape);
  {
    std::ofstream bad(dir / "bad.edaw", std::ios::binary);
    bad << "EDAX";
  }
  EXPECT_THROW(read_archive(dir / "bad.edaw"), FormatError);
  std::filesystem::resize_file(dir / "x.edaw", 30);
  EXPECT_THROW(read_archive(dir / "x.edaw"), FormatError);
}

void one_training_step(ModelGraph& m, std::size_t& changed, std::size_t& total, bool& all_have_grad) {
  std::vector<Tensor> before;
  for (const auto& p : m.params()) before.push_back(p.tensor);
  m.params().zero_grad();
  for (std::uint64_t item = 0; item < 2; ++item) {
    const auto clean = signal::normalize(eda(20 + item));
    std::vector<double> noisy = clean.values;
    std::mt19937_64 rng(item);
    std::normal_distribution<double> nd(0, 0.3);
    for (double& v : noisy) v += nd(rng);
    Graph g(true);
    const auto r = m.forward(g, g.constant(Tensor({1, 512}, noisy)), clean.stats);
    const auto loss = distill::loss_teacher(r.output, g.constant(Tensor({1, 512}, clean.values)));
    g.backward(loss);
    g.for_each_parameter_grad([&](const ParameterSet&, std::size_t i, std::span<const double> gr) {
      auto dst = m.params()[i].tensor.grad();
      for (std::size_t j = 0; j < gr.size(); ++j) dst[j] += gr[j];
    });
  }
  all_have_grad = true;
  for (const auto& p : m.params()) all_have_grad &= p.tensor.has_grad();
  tensor::OptimizerConfig cfg;
  tensor::adamw_step(m.params(), cfg, 1e-3, 1);
  changed = total = 0;
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    const auto& t = m.params()[i].tensor;
    for (std::size_t j = 0; j < t.size(); ++j) changed += t[j] != before[i][j];
    total += t.size();
  }
}

TEST(Models, GradientsReachEveryParameter) {
  for (auto kind : {ModelKind::student, ModelKind::teacher}) {
    auto m = kind == ModelKind::teacher ? build_teacher(teacher_config(), 7) : build_student(student_config(), 7);
    std::size_t changed = 0, total = 0;
    bool all = false;
    one_training_step(m, changed, total, all);
    EXPECT_TRUE(all) << to_string(kind);
    EXPECT_GE(static_cast<double>(changed), 0.99 * total) << to_string(kind);
  }
}

}  // namespace
