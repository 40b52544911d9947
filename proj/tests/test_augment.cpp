#include <gtest/gtest.h>

#include "spmf/augment.hpp"
#include "test_support.hpp"

namespace spmf {
namespace {

SpmfImage gradient_image(std::size_t w, std::size_t h) {
  SpmfImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      img.at(x, y) = {static_cast<std::uint8_t>(x * 7 % 256), static_cast<std::uint8_t>(y * 11 % 256),
                      static_cast<std::uint8_t>((x * y) % 256)};
  return img;
}

SpmfImage impulse(std::size_t size) {
  SpmfImage img(size, size);
  img.at(size / 2, size / 2) = {255, 255, 255};
  return img;
}

TEST(AugmentConfig, Validation) {
  AugmentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.crop_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.crop_fraction = 1.5;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.flip_probability = -0.1;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.gaussian_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

// ------------------------------------------------------------------- crop

TEST(RandomCrop, FullFractionIsIdentity) {
  const auto img = gradient_image(32, 32);
  AugmentConfig cfg;
  cfg.crop_fraction = 1.0;
  Rng rng(1);
  EXPECT_TRUE(random_crop(img, cfg, rng).same_pixels(img));
}

TEST(RandomCrop, UsesUniformOffsetsThenResizes) {
  const auto img = gradient_image(10, 10);
  AugmentConfig cfg;
  cfg.crop_fraction = 0.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed), replay(seed);
    const std::size_t ox = replay.below(6), oy = replay.below(6);
    const auto want = resize_image(crop(img, ox, oy, 5, 5), 10, 10);
    EXPECT_TRUE(random_crop(img, cfg, rng).same_pixels(want)) << seed;
  }
}

TEST(RandomCrop, ExtentRoundsUp) {
  EXPECT_EQ(crop_extent(32, 0.9), 29u);
  EXPECT_EQ(crop_extent(10, 0.01), 1u);
  EXPECT_EQ(crop_extent(7, 1.0), 7u);
}

TEST(Crop, OutOfRangeRejected) {
  const auto img = gradient_image(4, 4);
  EXPECT_THROW(crop(img, 2, 0, 3, 1), ArgumentError);
  EXPECT_THROW(crop(img, 0, 0, 0, 1), ArgumentError);
  EXPECT_EQ(crop(img, 1, 2, 2, 2).at(1, 1), img.at(2, 3));
}

// ------------------------------------------------------------------- flip

TEST(Flip, MirrorsColumns) {
  SpmfImage img(3, 1);
  img.at(0, 0) = {1, 0, 0};
  img.at(1, 0) = {2, 0, 0};
  img.at(2, 0) = {3, 0, 0};
  const auto f = flip_horizontal(img);
  EXPECT_EQ(f.at(0, 0).r, 3);
  EXPECT_EQ(f.at(1, 0).r, 2);
  EXPECT_EQ(f.at(2, 0).r, 1);
}

TEST(Flip, IsAnInvolution) {
  const auto img = gradient_image(9, 5);
  EXPECT_EQ(flip_horizontal(flip_horizontal(img)), img);
}

TEST(Flip, ProbabilityExtremes) {
  const auto img = gradient_image(8, 8);
  AugmentConfig cfg;
  cfg.crop_fraction = 1.0;
  cfg.gaussian_sigma = 0.0;
  cfg.flip_probability = 0.0;
  Rng a(3);
  EXPECT_TRUE(augment_image(img, cfg, a).same_pixels(img));
  cfg.flip_probability = 1.0;
  Rng b(3);
  EXPECT_TRUE(augment_image(img, cfg, b).same_pixels(flip_horizontal(img)));
}

// ------------------------------------------------------------------- blur

TEST(Blur, ZeroSigmaIsIdentity) {
  const auto img = gradient_image(6, 6);
  EXPECT_EQ(gaussian_blur(img, 0.0), img);
  EXPECT_THROW(gaussian_blur(img, -0.5), ArgumentError);
}

TEST(Blur, ConstantImageUnchanged) {
  const SpmfImage img(11, 7, {40, 90, 250});
  for (double sigma : {0.5, 1.0, 3.0}) EXPECT_EQ(gaussian_blur(img, sigma).pixels, img.pixels);
}

TEST(Blur, KernelIsNormalized) {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const auto k = gaussian_kernel(sigma);
    double sum = 0.0;
    for (double w : k) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_EQ(k.size() % 2, 1u);
  }
}

// Reference values: 255 * g(dx) * g(dy) with g the normalized discrete
// Gaussian on offsets -ceil(3 sigma)..ceil(3 sigma), rounded half-up.
TEST(Blur, ImpulseResponse) {
  struct Case {
    double sigma;
    std::vector<int> along_axis;  // offsets 0, 1, 2, ...
  };
  const Case cases[] = {{1.0, {41, 25, 5, 0}}, {0.5, {158, 21, 0}}, {2.0, {10, 9, 6, 3, 1, 0, 0}}};
  for (const auto& c : cases) {
    const auto out = gaussian_blur(impulse(21), c.sigma);
    for (std::size_t d = 0; d < c.along_axis.size(); ++d) {
      EXPECT_EQ(out.at(10 + d, 10).r, c.along_axis[d]) << "sigma " << c.sigma << " offset " << d;
      EXPECT_EQ(out.at(10, 10 - d).g, c.along_axis[d]) << "sigma " << c.sigma << " offset " << d;
    }
  }
}

// --------------------------------------------------------------- pipeline

TEST(Augment, DeterministicPerSeed) {
  const auto img = gradient_image(32, 32);
  AugmentConfig cfg;
  Rng a(77), b(77), c(78);
  const auto x = augment_image(img, cfg, a);
  EXPECT_EQ(x, augment_image(img, cfg, b));
  bool differs = false;
  for (int i = 0; i < 5 && !differs; ++i) differs = !augment_image(img, cfg, c).same_pixels(x);
  EXPECT_TRUE(differs);
}

TEST(Augment, PreservesSize) {
  const auto img = gradient_image(20, 13);
  Rng rng(5);
  const auto out = augment_image(img, {}, rng);
  EXPECT_EQ(out.width, 20u);
  EXPECT_EQ(out.height, 13u);
}

}  // namespace
}  // namespace spmf
