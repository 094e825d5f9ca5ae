#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ivfe/fen.hpp"
#include "support.hpp"

using namespace ivfe;
using ivfe::test::code;
using ivfe::test::error_code_of;

namespace {

GrayImage random_image(std::size_t side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img;
  img.side = side;
  img.pixels.resize(side * side);
  for (auto& p : img.pixels) p = u(rng);
  return img;
}

std::vector<LabeledImage> random_batch(std::size_t n, std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledImage> batch;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledImage item;
    item.image = random_image(side, rng);
    item.label = static_cast<int>(i % 4) + 1;
    batch.push_back(std::move(item));
  }
  return batch;
}

// Central differences over every parameter element. Returns the worst relative
// error |a - n| / max(|a|, |n|, floor).
double worst_gradient_error(FenModel model, const std::vector<LabeledImage>& batch, std::string* worst_name) {
  const auto analytic = loss_and_grad(model, batch).grads;
  constexpr double h = 1e-6;
  constexpr double floor = 1e-5;
  double worst = 0.0;
  for (std::size_t t = 0; t < model.params.size(); ++t) {
    auto& param = model.params[t];
    for (std::size_t i = 0; i < param.data.size(); ++i) {
      const double saved = param.data[i];
      param.data[i] = saved + h;
      const double up = loss_and_grad(model, batch).loss;
      param.data[i] = saved - h;
      const double down = loss_and_grad(model, batch).loss;
      param.data[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[t].data[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (rel > worst) {
        worst = rel;
        if (worst_name) *worst_name = model.params.name(t) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("fen") {
  TEST_CASE("gradients match central differences on a 2-block 8-channel net with 6x6 inputs") {
    FenArchitecture arch;
    arch.blocks = 2;
    arch.widths = {8};
    arch.feature_dim = 8;
    const auto model = init_model(arch, 11, HeadInit::kRandom);
    std::string where;
    const double worst = worst_gradient_error(model, random_batch(3, 6, 5), &where);
    MESSAGE("worst relative error " << worst << " at " << where);
    CHECK(worst < 1e-4);
  }

  TEST_CASE("gradients through strided and projected blocks match central differences") {
    FenArchitecture arch;
    arch.blocks = 1;
    arch.widths = {4, 8};
    arch.feature_dim = 8;
    const auto model = init_model(arch, 3, HeadInit::kRandom);
    std::string where;
    const double worst = worst_gradient_error(model, random_batch(4, 7, 9), &where);
    MESSAGE("worst relative error " << worst << " at " << where);
    CHECK(worst < 1e-4);
  }

  TEST_CASE("zero head gives a uniform prediction and loss ln 4") {
    const auto model = init_model(architecture_for_depth(1), 1);
    std::mt19937_64 rng(2);
    const auto out = forward(model, random_image(12, rng));
    for (double p : softmax(out.logits)) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
    for (std::size_t n : {1u, 3u, 8u}) {
      CHECK(std::abs(loss_and_grad(model, random_batch(n, 9, n)).loss - std::log(4.0)) < 1e-12);
    }
  }

  TEST_CASE("softmax sums to one and cross-entropy is nonnegative") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
      const std::array<double, 4> z{g(rng), g(rng), g(rng), g(rng)};
      const auto p = softmax(z);
      CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
      for (double v : p) CHECK(v >= 0.0);
    }
    const auto model = init_model(architecture_for_depth(1), 7, HeadInit::kRandom);
    CHECK(loss_and_grad(model, random_batch(5, 8, 1)).loss >= 0.0);
  }

  TEST_CASE("features have feature_dim entries for any side >= 8") {
    const auto model = init_model(architecture_for_depth(2), 5, HeadInit::kRandom);
    std::mt19937_64 rng(3);
    for (std::size_t side : {8u, 35u, 45u}) {
      const auto out = forward(model, random_image(side, rng));
      CHECK(out.features.size() == model.architecture.feature_dim);
      CHECK(extract_features(model, random_image(side, rng)).size() == 64);
    }
    const auto img = random_image(20, rng);
    CHECK(extract_features(model, img) == extract_features(model, img));
  }

  TEST_CASE("forward rejects images below the minimum side") {
    const auto model = init_model(architecture_for_depth(1), 5);
    std::mt19937_64 rng(3);
    CHECK(error_code_of([&] { (void)forward(model, random_image(7, rng)); }) == code(ErrorCode::kShapeMismatch));
    GrayImage bad = random_image(9, rng);
    bad.pixels.pop_back();
    CHECK(error_code_of([&] { (void)forward(model, bad); }) == code(ErrorCode::kShapeMismatch));
  }

  TEST_CASE("loss_and_grad validates its batch") {
    const auto model = init_model(architecture_for_depth(1), 5);
    std::vector<LabeledImage> empty;
    CHECK(error_code_of([&] { (void)loss_and_grad(model, empty); }) == code(ErrorCode::kShapeMismatch));
    auto batch = random_batch(2, 8, 1);
    batch[1].label = 5;
    CHECK(error_code_of([&] { (void)loss_and_grad(model, batch); }) == code(ErrorCode::kInvalidArgument));
    batch = random_batch(2, 8, 1);
    std::mt19937_64 rng(1);
    batch[1].image = random_image(9, rng);
    CHECK(error_code_of([&] { (void)loss_and_grad(model, batch); }) == code(ErrorCode::kShapeMismatch));
  }

  TEST_CASE("duplicating the whole batch leaves loss and gradients unchanged") {
    const auto model = init_model(architecture_for_depth(1), 8, HeadInit::kRandom);
    auto batch = random_batch(4, 10, 6);
    const auto once = loss_and_grad(model, batch);
    auto twice_batch = batch;
    twice_batch.insert(twice_batch.end(), batch.begin(), batch.end());
    const auto twice = loss_and_grad(model, twice_batch);
    CHECK(std::abs(once.loss - twice.loss) < 1e-12);
    for (std::size_t t = 0; t < once.grads.size(); ++t) {
      CHECK(ivfe::test::max_abs_diff(once.grads[t].data, twice.grads[t].data) < 1e-10);
    }
  }

  TEST_CASE("loss_and_grad does not modify the model") {
    const auto model = init_model(architecture_for_depth(1), 8, HeadInit::kRandom);
    const auto before = model.params;
    const auto buffers = model.buffers;
    (void)loss_and_grad(model, random_batch(4, 10, 6));
    CHECK(model.params == before);
    CHECK(model.buffers == buffers);
  }

  TEST_CASE("zeroed residual branches make identity blocks the identity on nonnegative input") {
    FenArchitecture arch;
    arch.blocks = 2;
    arch.widths = {8, 16};
    arch.feature_dim = 16;
    auto model = init_model(arch, 4, HeadInit::kRandom);
    zero_residual_branches(model);
    REQUIRE(residual_block_count(arch) == 4);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    // Blocks 0, 1 and 3 keep their shape; block 2 downsamples through a projection.
    for (std::size_t b : {0u, 1u, 3u}) {
      const std::size_t ch = b < 2 ? 8 : 16;
      Tensor x({2, ch, 6, 6});
      for (auto& v : x.data) v = u(rng);
      const Tensor y = residual_block_forward(model, b, x);
      CHECK(y.shape == x.shape);
      CHECK(ivfe::test::max_abs_diff(y.data, x.data) == 0.0);
    }
  }

  TEST_CASE("architecture validation and depth family") {
    for (std::size_t d = 1; d <= 5; ++d) {
      const auto arch = architecture_for_depth(d);
      CHECK(arch.blocks == d);
      CHECK(arch.feature_dim == 64);
      CHECK(residual_block_count(arch) == 4 * d);
    }
    CHECK(error_code_of([] { (void)architecture_for_depth(0); }) == code(ErrorCode::kInvalidArgument));
    CHECK(error_code_of([] { (void)architecture_for_depth(6); }) == code(ErrorCode::kInvalidArgument));
    FenArchitecture bad;
    bad.feature_dim = 32;
    CHECK(error_code_of([&] { bad.validate(); }) == code(ErrorCode::kInvalidArgument));
    bad = FenArchitecture{};
    bad.blocks = 0;
    CHECK(error_code_of([&] { bad.validate(); }) == code(ErrorCode::kInvalidArgument));
  }

  TEST_CASE("initialization is deterministic and shapes follow the architecture") {
    const auto arch = architecture_for_depth(2);
    const auto a = init_model(arch, 99, HeadInit::kRandom);
    const auto b = init_model(arch, 99, HeadInit::kRandom);
    CHECK(a.params == b.params);
    CHECK(a.params.at("stem.conv.w").shape == std::vector<std::size_t>{8, 1, 3, 3});
    CHECK(a.params.at("stage2.block1.proj.w").shape == std::vector<std::size_t>{16, 8, 1, 1});
    CHECK(a.params.at("head.w").shape == std::vector<std::size_t>{4, 64});
    CHECK_FALSE(a.params.find("stage1.block1.proj.w").has_value());
    const auto zero = init_model(arch, 99);
    for (double v : zero.params.at("head.w").data) CHECK(v == 0.0);
  }
}
