#include "test_doctest.hpp"

#include "fixtures.hpp"
#include "terragan/image.hpp"
#include "terragan/rng.hpp"

using namespace terragan;

TEST_SUITE("image") {
  TEST_CASE("model range maps 0, 1 and 0.5 to -1, 1 and 0") {
    Image img(1, 3, 1);
    img.data = {0.0f, 1.0f, 0.5f};
    const Image m = to_model_range(img);
    CHECK(m.data == std::vector<float>{-1.0f, 1.0f, 0.0f});
  }

  TEST_CASE("constant 0.25 maps to constant -0.5") {
    const Image m = to_model_range(Image(4, 4, 3, 0.25f));
    for (float v : m.data) CHECK(v == -0.5f);
  }

  TEST_CASE("from_model_range inverts to_model_range") {
    const Image x = testing::random_image(17, 9, 3, 5);
    const Image back = from_model_range(to_model_range(x));
    CHECK(testing::max_abs_diff(x, back) <= 1e-7);
  }

  TEST_CASE("out-of-range values are rejected") {
    CHECK_THROWS_AS(to_model_range(Image(1, 1, 1, 1.5f)), InvalidInput);
    CHECK_THROWS_AS(to_model_range(Image(1, 1, 1, -0.01f)), InvalidInput);
    CHECK_THROWS_AS(from_model_range(Image(1, 1, 1, -1.01f)), InvalidInput);
  }

  TEST_CASE("crop copies the requested window") {
    Image img(4, 5, 2);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = float(i);
    const Image c = img.crop(1, 2, 2, 3);
    CHECK(c.height == 2);
    CHECK(c.width == 3);
    CHECK(c.at(0, 0, 1) == img.at(1, 2, 1));
    CHECK(c.at(1, 2, 0) == img.at(2, 4, 0));
    CHECK_THROWS_AS((void)img.crop(3, 0, 2, 1), InvalidInput);
  }

  TEST_CASE("box resize averages exact blocks") {
    Image img(2, 2, 1);
    img.data = {0.0f, 1.0f, 0.5f, 0.5f};
    const Image r = resize(img, 1, 1);
    CHECK(r.data[0] == doctest::Approx(0.5));
  }

  TEST_CASE("checksum depends on pixels") {
    Image a(3, 3, 1, 0.1f);
    Image b = a;
    CHECK(checksum(a) == checksum(b));
    b.data[4] = 0.2f;
    CHECK(checksum(a) != checksum(b));
  }
}

TEST_SUITE("rng") {
  TEST_CASE("same seed gives the same stream") {
    Random a(42);
    Random b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  }

  TEST_CASE("below stays in range") {
    Random r(1);
    for (int i = 0; i < 10000; ++i) CHECK(r.below(7) < 7u);
  }

  TEST_CASE("derived seeds differ per stream") {
    CHECK(derive_seed(1, 2, 1) != derive_seed(1, 2, 2));
    CHECK(derive_seed(1, 2, 1) != derive_seed(1, 3, 1));
  }
}
