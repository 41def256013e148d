#include "test_doctest.hpp"

#include "terragan/baselines.hpp"

using namespace terragan;

TEST_SUITE("baselines") {
  TEST_CASE("equal corners with zero roughness give a flat grid") {
    DiamondSquareConfig cfg;
    cfg.exponent = 1;
    cfg.roughness = 0.0;
    cfg.corner_values = {1.0, 1.0, 1.0, 1.0};
    const Image g = diamond_square(cfg);
    REQUIRE(g.data.size() == 9);
    for (float v : g.data) CHECK(v == 1.0f);
  }

  TEST_CASE("3x3 grid matches the hand-computed three-neighbour border rule") {
    // Corners TL=0, TR=0, BL=0, BR=1. Centre = 1/4. Each edge midpoint averages
    // its two corners and the centre: top (0+0+1/4)/3, left (0+0+1/4)/3,
    // right (0+1+1/4)/3, bottom (0+1+1/4)/3.
    DiamondSquareConfig cfg;
    cfg.exponent = 1;
    cfg.roughness = 0.0;
    cfg.corner_values = {0.0, 0.0, 0.0, 1.0};
    const Image g = diamond_square(cfg);
    const double expected[3][3] = {{0.0, 1.0 / 12, 0.0}, {1.0 / 12, 0.25, 5.0 / 12}, {0.0, 5.0 / 12, 1.0}};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) CHECK(g.at(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-7));
    }
  }

  TEST_CASE("interior square-step points average four neighbours") {
    // n=2, roughness 0, corners (0,0,0,1). Level 0 reproduces the 3x3 grid on
    // the even lattice; (1,1) is the diamond centre of the top-left quadrant
    // and (2,1) averages (2,0), (2,2), (1,1), (3,1).
    DiamondSquareConfig cfg;
    cfg.exponent = 2;
    cfg.roughness = 0.0;
    cfg.corner_values = {0.0, 0.0, 0.0, 1.0};
    const Image g = diamond_square(cfg);
    const double top_left_centre = (0.0 + 1.0 / 12 + 1.0 / 12 + 0.25) / 4;
    const double bottom_left_centre = (1.0 / 12 + 0.25 + 0.0 + 5.0 / 12) / 4;
    CHECK(g.at(1, 1) == doctest::Approx(top_left_centre).epsilon(1e-7));
    CHECK(g.at(3, 1) == doctest::Approx(bottom_left_centre).epsilon(1e-7));
    CHECK(g.at(2, 1) == doctest::Approx((1.0 / 12 + 0.25 + top_left_centre + bottom_left_centre) / 4).epsilon(1e-7));
  }

  TEST_CASE("shape, range and determinism") {
    DiamondSquareConfig cfg;
    cfg.exponent = 5;
    cfg.roughness = 0.8;
    cfg.seed = 3;
    const Image a = diamond_square(cfg);
    CHECK(a.height == 33);
    CHECK(a.width == 33);
    for (float v : a.data) CHECK((v >= 0.0f && v <= 1.0f));
    CHECK(diamond_square(cfg).data == a.data);
    cfg.seed = 4;
    CHECK(diamond_square(cfg).data != a.data);
  }

  TEST_CASE("zero roughness ignores the seed") {
    DiamondSquareConfig cfg;
    cfg.exponent = 4;
    cfg.roughness = 0.0;
    cfg.corner_values = {0.1, 0.7, 0.3, 0.9};
    cfg.seed = 1;
    const Image a = diamond_square(cfg);
    cfg.seed = 999;
    CHECK(diamond_square(cfg).data == a.data);
  }

  TEST_CASE("exponent below one is rejected") {
    DiamondSquareConfig cfg;
    cfg.exponent = 0;
    CHECK_THROWS_AS(diamond_square(cfg), InvalidInput);
  }
}
