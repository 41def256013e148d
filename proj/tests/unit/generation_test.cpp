#include "test_doctest.hpp"

#include <cmath>

#include "fixtures.hpp"
#include "terragan/generation.hpp"
#include "terragan/models.hpp"

using namespace terragan;
using testing::TempDir;

namespace {

ModelCheckpoint heightmap_model(std::uint64_t seed = 1) {
  return make_checkpoint(build_heightmap_generator(GeneratorSpec::heightmap(32, 8, 16), seed));
}

ModelCheckpoint texture_model(std::uint64_t seed = 2) {
  return make_checkpoint(build_texture_generator(GeneratorSpec::texture(32, 8), seed));
}

}  // namespace

TEST_SUITE("generation") {
  TEST_CASE("latents have the requested shape and are seeded") {
    const auto z = sample_latent(16, 5, 3);
    REQUIRE(z.size() == 5);
    for (const auto& v : z) CHECK(v.k() == 16);
    CHECK((sample_latent(16, 5, 3) == z));
    CHECK((sample_latent(16, 5, 4) != z));
  }

  TEST_CASE("latent prior has zero mean") {
    const auto z = sample_latent(8, 100000, 9);
    for (int c = 0; c < 8; ++c) {
      double s = 0.0;
      for (const auto& v : z) s += v.values[c];
      CHECK(std::fabs(s / z.size()) < 0.02);
    }
  }

  TEST_CASE("generated heightmaps are bounded and survive a checkpoint round-trip") {
    TempDir dir("gen");
    const auto ckpt = heightmap_model();
    const auto z = sample_latent(16, 5, 1);
    const auto maps = generate_heightmaps(ckpt, z);
    REQUIRE(maps.size() == 5);
    for (const auto& m : maps) {
      CHECK(m.height == 32);
      CHECK(m.channels == 1);
      for (float v : m.data) CHECK((v > -1.0f && v < 1.0f));
    }
    save_checkpoint(ckpt, dir / "g.ckpt");
    const auto again = generate_heightmaps(load_checkpoint(dir / "g.ckpt"), z);
    for (std::size_t i = 0; i < maps.size(); ++i) CHECK(testing::max_abs_diff(maps[i], again[i]) <= 1e-6);
    // Batch composition does not change individual outputs in inference mode.
    const auto single = generate_heightmaps(ckpt, std::vector<LatentVector>{z[3]});
    CHECK(testing::max_abs_diff(single[0], maps[3]) <= 1e-6);
  }

  TEST_CASE("wrong latent size is rejected") {
    CHECK_THROWS_AS(generate_heightmaps(heightmap_model(), sample_latent(15, 1, 1)), InvalidInput);
  }

  TEST_CASE("interpolation endpoints, midpoint and affinity") {
    const auto z = sample_latent(6, 2, 5);
    const auto two = interpolate_latents(z[0], z[1], 2);
    CHECK((two[0] == z[0]));
    CHECK((two[1] == z[1]));
    const auto three = interpolate_latents(z[0], z[1], 3);
    for (int c = 0; c < 6; ++c) {
      CHECK(three[1].values[c] == doctest::Approx((z[0].values[c] + z[1].values[c]) / 2).epsilon(1e-6));
    }
    const auto same = interpolate_latents(z[0], z[0], 4);
    for (const auto& v : same) CHECK((v == z[0]));
    const auto path = interpolate_latents(z[0], z[1], 9);
    CHECK((path.front() == z[0]));
    CHECK((path.back() == z[1]));
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      for (int c = 0; c < 6; ++c) {
        CHECK(std::fabs(path[i + 1].values[c] - 2 * path[i].values[c] + path[i - 1].values[c]) <= 1e-6);
      }
    }
  }

  TEST_CASE("blur radius zero is the identity and a constant is a fixpoint") {
    const Image x = testing::random_image(16, 16, 1, 3, -1, 1);
    CHECK(gaussian_blur(x, 0.0).data == x.data);
    const Image c(16, 16, 1, 0.3f);
    CHECK(testing::max_abs_diff(gaussian_blur(c, 0.4), c) <= 1e-6);
  }

  TEST_CASE("blur matches a dense convolution and preserves the mean") {
    for (const double sigma : {0.4, 1.0, 2.5}) {
      for (std::uint64_t s = 0; s < 3; ++s) {
        const Image x = testing::random_image(16, 16, 1, 100 + s, -1, 1);
        const Image b = gaussian_blur(x, sigma);
        CHECK(testing::max_abs_diff(b, testing::dense_gaussian_oracle(x, sigma)) <= 1e-5);
        CHECK(std::fabs(testing::mean(b) - testing::mean(x)) <= 1e-4);
      }
    }
  }

  TEST_CASE("blur is linear") {
    const Image x = testing::random_image(16, 16, 1, 1, -1, 1);
    const Image y = testing::random_image(16, 16, 1, 2, -1, 1);
    Image mix(16, 16, 1);
    for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 2.0f * x.data[i] + 0.5f * y.data[i];
    const Image bx = gaussian_blur(x, 0.8);
    const Image by = gaussian_blur(y, 0.8);
    const Image bm = gaussian_blur(mix, 0.8);
    for (std::size_t i = 0; i < mix.data.size(); ++i) CHECK(std::fabs(bm.data[i] - (2 * bx.data[i] + 0.5 * by.data[i])) <= 1e-6);
  }

  TEST_CASE("kernel is normalized and truncated at three sigma") {
    const auto k = gaussian_kernel(0.4);
    CHECK(k.size() == 3);  // ceil(3 * 0.4) = 2 taps beside the centre
    const auto k2 = gaussian_kernel(2.0);
    CHECK(k2.size() == 7);
    double sum = k2[0];
    for (std::size_t i = 1; i < k2.size(); ++i) sum += 2 * k2[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(gaussian_blur(Image(2, 2, 1), -1.0), InvalidInput);
  }

  TEST_CASE("pairs have matching shapes and are pure functions of their inputs") {
    const auto g_h = heightmap_model();
    const auto g_t = texture_model();
    const auto z = sample_latent(16, 1, 8)[0];
    const auto a = generate_pair(g_h, g_t, z, 0.4);
    CHECK(a.heightmap.height == 32);
    CHECK(a.heightmap.channels == 1);
    CHECK(a.texture.height == 32);
    CHECK(a.texture.channels == 3);
    const auto b = generate_pair(g_h, g_t, z, 0.4);
    CHECK(a.heightmap.data == b.heightmap.data);
    CHECK(a.texture.data == b.texture.data);

    const auto raw = generate_pair(g_h, g_t, z, 0.0);
    const auto direct = generate_heightmaps(g_h, std::vector<LatentVector>{z});
    CHECK(raw.heightmap.data == direct[0].data);
    CHECK(raw.texture.data == generate_textures(g_t, direct)[0].data);
  }

  TEST_CASE("pairing generators of different resolutions is rejected") {
    const auto g_t64 = make_checkpoint(build_texture_generator(GeneratorSpec::texture(64, 4), 1));
    CHECK_THROWS_AS(generate_pair(heightmap_model(), g_t64, sample_latent(16, 1, 1)[0], 0.4), InvalidInput);
  }

  TEST_CASE("montage layouts") {
    std::vector<Image> four;
    for (int i = 0; i < 4; ++i) four.push_back(Image(8, 8, 1, 0.1f * i));
    const Image grid = montage(four, 2, 2);
    CHECK(grid.height == 16);
    CHECK(grid.width == 16);
    CHECK(grid.at(9, 9) == four[3].at(1, 1));

    const std::vector<Image> three(four.begin(), four.begin() + 3);
    const Image holey = montage(three, 2, 2);
    CHECK(holey.at(12, 12) == -1.0f);
    CHECK(holey.at(12, 3) == four[2].at(4, 3));

    const Image single = montage(std::vector<Image>{four[1]}, 1, 1);
    CHECK(single.data == four[1].data);
    CHECK_THROWS_AS(montage(four, 1, 3), InvalidInput);
  }
}
