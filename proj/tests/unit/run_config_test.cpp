#include "test_doctest.hpp"

#include "fixtures.hpp"
#include "terragan/run_config.hpp"

using namespace terragan;

TEST_SUITE("run_config") {
  TEST_CASE("empty object keeps every default") {
    const RunConfig cfg = parse_run_config("{}");
    CHECK(cfg.training.optimizer.learning_rate == 1e-4);
    CHECK(cfg.training.loss.lambda == 100.0);
    CHECK(cfg.filter.tile_size == 512);
    CHECK(cfg.filter.max_black_fraction == 0.9);
    CHECK(cfg.generation.blur_radius_px == 0.4);
    CHECK(cfg.mesh.vertical_scale == 4000.0);
  }

  TEST_CASE("sections are applied and the seed reaches every consumer") {
    const RunConfig cfg = parse_run_config(R"({
      "seed": 9,
      "filter": {"tile_size": 256, "top_m": 40},
      "training": {"learning_rate": 0.0002, "batch_size": 8, "resolution": 64},
      "loss": {"variant": "cross_entropy", "lambda": 10, "distance": "L2"},
      "generation": {"count": 4, "emit_texture": false},
      "mesh": {"horizontal_scale": 30}
    })");
    CHECK(cfg.seed == 9);
    CHECK(cfg.training.seed == 9);
    CHECK(cfg.generation.seed == 9);
    CHECK(cfg.filter.tile_size == 256);
    CHECK(cfg.filter.top_m == 40);
    CHECK(cfg.training.optimizer.learning_rate == 2e-4);
    CHECK(cfg.training.batch_size == 8);
    CHECK(cfg.training.resolution == 64);
    CHECK(cfg.training.loss.variant == AdversarialVariant::cross_entropy);
    CHECK(cfg.training.loss.distance == Distance::l2);
    CHECK(cfg.generation.count == 4);
    CHECK_FALSE(cfg.generation.emit_texture);
    CHECK(cfg.mesh.horizontal_scale == 30.0);
  }

  TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(parse_run_config(R"({"sed": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"training": {"lr": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"training": {"batch_size": "16"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"training": {"optimizer": "Adam"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
  }

  TEST_CASE("dump and parse round-trip") {
    RunConfig cfg = parse_run_config(R"({"seed": 3, "loss": {"lambda": 12.5}})");
    cfg.command = "train-texture";
    cfg.inputs["manifest"] = "data/manifest.jsonl";
    const RunConfig back = parse_run_config(dump_run_config(cfg));
    CHECK(back.command == "train-texture");
    CHECK(back.inputs == cfg.inputs);
    CHECK(back.training.loss.lambda == 12.5);
    CHECK(dump_run_config(back) == dump_run_config(cfg));
  }
}
