#include "test_doctest.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "terragan/export.hpp"
#include "terragan/models.hpp"
#include "terragan/raster_io.hpp"
#include "terragan/run_config.hpp"

using namespace terragan;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(const TempDir& dir, const std::string& args) {
  const auto out_path = dir / "stdout.txt";
  const auto err_path = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + TERRAGAN_CLI + "\" " + args + " >\"" + out_path.string() + "\" 2>\"" +
                          err_path.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun run;
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    const auto bytes = testing::read_bytes(p);
    return std::string(bytes.begin(), bytes.end());
  };
  run.out = slurp(out_path);
  run.err = slurp(err_path);
  return run;
}

std::size_t count_prefix(const fs::path& dir, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().rfind(prefix, 0) == 0;
  return n;
}

/// Small world rasters on disk plus untrained generator checkpoints.
struct Workspace {
  TempDir dir{"cli"};
  std::string root = dir.path().string();

  Workspace() {
    const auto world = testing::synthetic_world(128, 256, 5, 0.3);
    write_image_png(dir / "h.png", world.heightmap, 16);
    write_image_png(dir / "t.png", world.texture, 8);
    save_checkpoint(make_checkpoint(build_heightmap_generator(GeneratorSpec::heightmap(32, 8, 16), 1)), dir / "G_h.ckpt");
    save_checkpoint(make_checkpoint(build_texture_generator(GeneratorSpec::texture(32, 8), 2)), dir / "G_t.ckpt");
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  std::string prepare_flags() const {
    return "prepare-data --heightmap " + p("h.png") + " --texture " + p("t.png") +
           " --reference-tile 0 0 --tile-size 32 --stride 32 --top-m 6 --val-fraction 0";
  }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("prepare-data reports stage counts and reproduces the manifest") {
    TempDir dir("cli_world");
    const auto world = testing::synthetic_world(1024, 2048, 3, 0.1);
    write_image_png(dir / "h.png", world.heightmap, 16);
    write_image_png(dir / "t.png", world.texture, 8);
    const std::string flags = "prepare-data --heightmap " + (dir / "h.png").string() + " --texture " +
                              (dir / "t.png").string() + " --reference-tile 512 0 --tile-size 512 --stride 512";
    const auto a = cli(dir, flags + " --top-m 3 --out " + (dir / "a").string());
    REQUIRE(a.code == 0);
    CHECK(a.out.find("candidate tiles: 8") != std::string::npos);
    cli(dir, flags + " --top-m 3 --out " + (dir / "b").string());
    CHECK(testing::read_bytes(dir / "a" / "manifest.jsonl") == testing::read_bytes(dir / "b" / "manifest.jsonl"));

    const auto many = cli(dir, flags + " --top-m 100 --out " + (dir / "c").string());
    CHECK(many.code == 0);
    CHECK(many.err.find("warning") != std::string::npos);
    CHECK(many.out.find("selected (top-m 100): 8") != std::string::npos);
  }

  TEST_CASE("prepare-data without inputs or reference is an error") {
    Workspace ws;
    CHECK(cli(ws.dir, "prepare-data --heightmap missing.png --texture " + ws.p("t.png") +
                          " --reference-tile 0 0 --out " + ws.p("x"))
              .code != 0);
    CHECK(cli(ws.dir, "prepare-data --heightmap " + ws.p("h.png") + " --texture " + ws.p("t.png") + " --out " +
                          ws.p("x"))
              .code == 2);
  }

  TEST_CASE("training commands: defaults, zero steps, missing manifest, resume") {
    Workspace ws;
    REQUIRE(cli(ws.dir, ws.prepare_flags() + " --out " + ws.p("data")).code == 0);
    const std::string manifest = ws.p("data/manifest.jsonl");

    const auto zero = cli(ws.dir, "train-texture --manifest " + manifest + " --steps 0 --out " + ws.p("t0"));
    REQUIRE(zero.code == 0);
    CHECK(zero.out.find("RMSProp lr=0.0001") != std::string::npos);
    CHECK(zero.out.find("lambda: 100") != std::string::npos);
    CHECK(zero.out.find("least_squares") != std::string::npos);
    CHECK(load_checkpoint(ws.dir / "t0" / "G_t.ckpt").training_step == 0);
    CHECK(fs::exists(ws.dir / "t0" / "config.json"));

    CHECK(cli(ws.dir, "train-heightmap --manifest " + ws.p("nope.jsonl") + " --out " + ws.p("x")).code == 2);

    const std::string base = "train-heightmap --manifest " + manifest +
                             " --batch-size 2 --gen-channels 8 --disc-channels 8 --latent-dim 16 --out " + ws.p("th");
    REQUIRE(cli(ws.dir, base + " --steps 4 --checkpoint-every 2").code == 0);
    CHECK(fs::exists(ws.dir / "th" / "checkpoints"));
    REQUIRE(cli(ws.dir, base + " --steps 6 --resume").code == 0);
    CHECK(load_checkpoint(ws.dir / "th" / "G_h.ckpt").training_step == 6);
    std::ifstream log(ws.dir / "th" / "log.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(log, line)) ++rows;
    CHECK(rows == 7);  // header plus steps 1..6

    const auto mismatch = cli(ws.dir, base + " --steps 8 --lr 0.001 --resume");
    CHECK(mismatch.code != 0);
    CHECK(mismatch.err.find("hash") != std::string::npos);
  }

  TEST_CASE("generate writes pairs, a montage and a seed record") {
    Workspace ws;
    const std::string flags =
        "generate --heightmap-model " + ws.p("G_h.ckpt") + " --texture-model " + ws.p("G_t.ckpt") + " --n 9 --montage 3x3 --seed 4";
    REQUIRE(cli(ws.dir, flags + " --out " + ws.p("a")).code == 0);
    CHECK(count_prefix(ws.dir / "a", "heightmap_") == 9);
    CHECK(count_prefix(ws.dir / "a", "texture_") == 9);
    CHECK(fs::exists(ws.dir / "a" / "montage.png"));
    CHECK(fs::exists(ws.dir / "a" / "seeds.json"));

    REQUIRE(cli(ws.dir, flags + " --out " + ws.p("b")).code == 0);
    for (const auto& e : fs::directory_iterator(ws.dir / "a")) {
      CHECK(testing::read_bytes(e.path()) == testing::read_bytes(ws.dir / "b" / e.path().filename()));
    }

    REQUIRE(cli(ws.dir, "generate --heightmap-model " + ws.p("G_h.ckpt") + " --n 3 --no-texture --out " + ws.p("c")).code == 0);
    CHECK(count_prefix(ws.dir / "c", "heightmap_") == 3);
    CHECK(count_prefix(ws.dir / "c", "texture_") == 0);

    CHECK(cli(ws.dir, "generate --heightmap-model " + ws.p("G_h.ckpt") + " --n 5 --montage 2x2 --texture-model " +
                          ws.p("G_t.ckpt") + " --out " + ws.p("d"))
              .code == 2);
  }

  TEST_CASE("interpolate frame counts and reproducibility") {
    Workspace ws;
    const std::string flags = "interpolate --heightmap-model " + ws.p("G_h.ckpt") + " --steps 5 --seed 6";
    REQUIRE(cli(ws.dir, flags + " --out " + ws.p("a")).code == 0);
    REQUIRE(cli(ws.dir, flags + " --out " + ws.p("b")).code == 0);
    CHECK(count_prefix(ws.dir / "a", "frame_") == 5);
    CHECK(testing::read_bytes(ws.dir / "a" / "interpolation.png") ==
          testing::read_bytes(ws.dir / "b" / "interpolation.png"));
    const auto strip = read_png_samples(ws.dir / "a" / "interpolation.png");
    CHECK(strip.width == 5 * 32);
    CHECK(strip.height == 32);
  }

  TEST_CASE("export formats") {
    Workspace ws;
    write_heightmap_png16(Image(2, 2, 1, 0.5f), ws.dir / "two.png");
    REQUIRE(cli(ws.dir, "export --input " + ws.p("two.png") + " --format obj --out " + ws.p("o")).code == 0);
    std::ifstream obj(ws.dir / "o" / "two.obj");
    std::string line;
    std::size_t faces = 0;
    while (std::getline(obj, line)) faces += line.rfind("f ", 0) == 0;
    CHECK(faces == 2);

    write_heightmap_png16(Image(33, 33, 1, 0.0f), ws.dir / "big.png");
    REQUIRE(cli(ws.dir, "export --input " + ws.p("big.png") + " --format raw --out " + ws.p("r")).code == 0);
    CHECK(fs::file_size(ws.dir / "r" / "big.raw") == 2178);

    REQUIRE(cli(ws.dir, "export --input " + ws.p("big.png") + " --format png16 --out " + ws.p("p")).code == 0);
    CHECK(read_png_samples(ws.dir / "p" / "big.png").bit_depth == 16);

    CHECK(cli(ws.dir, "export --input " + ws.p("big.png") + " --format tiff --out " + ws.p("x")).code == 2);
  }

  TEST_CASE("baseline is 33x33 for n=5 and seed-independent without roughness") {
    Workspace ws;
    REQUIRE(cli(ws.dir, "baseline --n 5 --roughness 0 --seed 1 --out " + ws.p("a")).code == 0);
    REQUIRE(cli(ws.dir, "baseline --n 5 --roughness 0 --seed 2 --out " + ws.p("b")).code == 0);
    const auto png = read_png_samples(ws.dir / "a" / "baseline.png");
    CHECK(png.width == 33);
    CHECK(png.height == 33);
    CHECK(png.bit_depth == 16);
    CHECK(testing::read_bytes(ws.dir / "a" / "baseline.png") == testing::read_bytes(ws.dir / "b" / "baseline.png"));
  }

  TEST_CASE("config files are strict, flags override them, and the echo reruns") {
    Workspace ws;
    {
      std::ofstream bad(ws.dir / "bad.json");
      bad << R"({"generation": {"cuont": 3}})";
    }
    CHECK(cli(ws.dir, "baseline --config " + ws.p("bad.json") + " --out " + ws.p("x")).code == 2);

    {
      std::ofstream good(ws.dir / "good.json");
      good << R"({"seed": 5, "generation": {"count": 2, "emit_texture": false}})";
    }
    REQUIRE(cli(ws.dir, "generate --config " + ws.p("good.json") + " --heightmap-model " + ws.p("G_h.ckpt") +
                            " --n 3 --out " + ws.p("g"))
                .code == 0);
    CHECK(count_prefix(ws.dir / "g", "heightmap_") == 3);
    CHECK(count_prefix(ws.dir / "g", "texture_") == 0);
    const RunConfig echoed = load_run_config(ws.dir / "g" / "config.json");
    CHECK(echoed.command == "generate");
    CHECK(echoed.seed == 5);
    CHECK(echoed.generation.count == 3);
    CHECK(echoed.inputs.at("heightmap_model") == ws.p("G_h.ckpt"));

    // The echoed config with the same model reproduces the outputs.
    REQUIRE(cli(ws.dir, "generate --config " + ws.p("g/config.json") + " --heightmap-model " + ws.p("G_h.ckpt") +
                            " --out " + ws.p("g2"))
                .code == 0);
    CHECK(testing::read_bytes(ws.dir / "g" / "heightmap_002.png") ==
          testing::read_bytes(ws.dir / "g2" / "heightmap_002.png"));
  }

  TEST_CASE("usage errors exit with code 2") {
    Workspace ws;
    CHECK(cli(ws.dir, "").code == 2);
    CHECK(cli(ws.dir, "no-such-command").code == 2);
    CHECK(cli(ws.dir, "baseline --n").code == 2);
    CHECK(cli(ws.dir, "--help").code == 0);
  }
}
