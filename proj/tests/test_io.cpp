#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pathgan/error.hpp"
#include "pathgan/image.hpp"
#include "pathgan/io.hpp"
#include "pathgan/nn/checkpoint.hpp"
#include "pathgan/rng.hpp"
#include "pathgan/synth.hpp"

using namespace pathgan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pathgan_io_" + std::to_string(Rng(std::random_device{}())
                                                                           .next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("pgm round trip, 8 and 16 bit") {
  TempDir tmp;
  SaliencyMap m(2, 2);
  m.values = {0, 128, 255, 64};
  write_pgm(tmp.file("a.pgm"), m, 255);
  int maxval = 0;
  const SaliencyMap r = read_pgm(tmp.file("a.pgm"), &maxval);
  CHECK(maxval == 255);
  CHECK(r.width == 2);
  CHECK(r.height == 2);
  CHECK(r.values == std::vector<double>{0, 128, 255, 64});

  SaliencyMap wide(3, 1);
  wide.values = {0, 300, 65535};
  write_pgm(tmp.file("b.pgm"), wide, 65535);
  const SaliencyMap rw = read_pgm(tmp.file("b.pgm"), &maxval);
  CHECK(maxval == 65535);
  CHECK(rw.values == std::vector<double>{0, 300, 65535});
}

TEST_CASE("pgm decoder: documented error cases") {
  TempDir tmp;
  write_bytes(tmp.file("p2.pgm"), "P2\n2 2\n255\n0 1 2 3\n");
  try {
    read_pgm(tmp.file("p2.pgm"));
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::BadMagic);
  }

  write_bytes(tmp.file("short.pgm"), std::string("P5\n2 2\n255\n") + "\x01\x02");
  try {
    read_pgm(tmp.file("short.pgm"));
    FAIL("expected TruncatedData");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::TruncatedData);
  }

  write_bytes(tmp.file("max.pgm"), "P5\n1 1\n70000\n\x01\x02");
  try {
    read_pgm(tmp.file("max.pgm"));
    FAIL("expected UnsupportedMaxval");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::UnsupportedMaxval);
  }

  // comments in the header are fine
  write_bytes(tmp.file("c.pgm"), "P5\n# a comment\n2 # inline\n1\n255\n\x09\x07");
  const SaliencyMap ok = read_pgm(tmp.file("c.pgm"));
  CHECK(ok.values == std::vector<double>{9, 7});
}

TEST_CASE("pgm decoder survives a malformed-header fuzz corpus") {
  TempDir tmp;
  Rng rng(1234);
  const std::string seeds[] = {
      "",
      "P",
      "P5",
      "P5\n",
      "P5\n-3 2\n255\n",
      "P5\n2\n",
      "P5\n2 2\n",
      "P5\n2 2\n0\n",
      "P5\n999999999 999999999\n255\n",
      "P5\n2 2\n255",
      "P5 2 2 255 ",
      "P6\n2 2\n255\n0000",
      "P5\n#only comment",
      "P5\n2 2\n65535\n\x01",
  };
  int caught = 0;
  for (const std::string& s : seeds) {
    for (int mut = 0; mut < 40; ++mut) {
      std::string body = s;
      // random byte mutations, insertions, truncations
      if (!body.empty() && rng.bernoulli(0.5)) {
        body[rng.below(body.size())] = static_cast<char>(rng.below(256));
      }
      if (rng.bernoulli(0.3)) body += static_cast<char>(rng.below(256));
      if (!body.empty() && rng.bernoulli(0.3)) body.resize(rng.below(body.size() + 1));
      const std::string f = tmp.file("fuzz.pgm");
      write_bytes(f, body);
      try {
        read_pgm(f);
      } catch (const Error&) {
        ++caught;  // typed error, never a crash
      }
    }
  }
  CHECK(caught > 0);
}

TEST_CASE("planar-lines round trip preserves every field exactly") {
  TempDir tmp;
  Rng rng(55);
  std::vector<Scanpath> paths;
  for (int i = 0; i < 10; ++i) {
    Scanpath sp;
    sp.image_id = "img_" + std::to_string(i);
    if (i % 2 == 0) sp.observer_id = "obs" + std::to_string(i);
    double t = 0;
    for (int k = 0, n = rng.uniform_int(1, 8); k < n; ++k) {
      sp.fixations.push_back({rng.uniform(), rng.uniform(), t});
      t += rng.uniform(0.01, 0.7);
    }
    paths.push_back(sp);
  }
  write_scanpaths_planar(tmp.file("sp.jsonl"), paths);
  const std::vector<Scanpath> loaded = load_scanpaths_planar(tmp.file("sp.jsonl"));
  REQUIRE(loaded.size() == paths.size());
  for (size_t i = 0; i < paths.size(); ++i) {
    CHECK(loaded[i].image_id == paths[i].image_id);
    CHECK(loaded[i].observer_id == paths[i].observer_id);
    REQUIRE(loaded[i].size() == paths[i].size());
    for (size_t k = 0; k < paths[i].size(); ++k) {
      CHECK(loaded[i].fixations[k].x == paths[i].fixations[k].x);
      CHECK(loaded[i].fixations[k].y == paths[i].fixations[k].y);
      CHECK(loaded[i].fixations[k].t == paths[i].fixations[k].t);
    }
  }
}

TEST_CASE("planar-lines loader reports parse and validation errors") {
  TempDir tmp;
  write_bytes(tmp.file("bad.jsonl"), "{\"image_id\": \"a\", \"fixations\": [[0.5,0.5,0]]}\nnot json\n");
  try {
    load_scanpaths_planar(tmp.file("bad.jsonl"));
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::ParseError);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  write_bytes(tmp.file("oor.jsonl"),
              "{\"image_id\": \"a\", \"observer\": null, \"fixations\": [[1.5,0.5,0]]}\n");
  try {
    load_scanpaths_planar(tmp.file("oor.jsonl"));
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::ValidationError);
    CHECK(std::string(e.what()).find("record 0") != std::string::npos);
  }
}

TEST_CASE("spherical csv loader converts degrees onto the equirectangular frame") {
  TempDir tmp;
  write_bytes(tmp.file("s.csv"),
              "image,observer,index,lon_deg,lat_deg,t\n"
              "pano,o1,1,0,45,0.2\n"
              "pano,o1,0,90,0,0.0\n"
              "pano,o2,0,-180,-90,0.0\n");
  const auto paths = load_scanpaths_spherical_csv(tmp.file("s.csv"));
  REQUIRE(paths.size() == 2);
  REQUIRE(paths[0].size() == 2);
  // rows are ordered by their index column
  CHECK(paths[0].fixations[0].x == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(paths[0].fixations[0].y == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(paths[0].fixations[1].y == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(paths[1].fixations[0].x == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(paths[1].fixations[0].y == doctest::Approx(1.0).epsilon(1e-14));

  write_bytes(tmp.file("bad.csv"),
              "image,observer,index,lon_deg,lat_deg,t\npano,o1,0,270,0,0\n");
  try {
    load_scanpaths_spherical_csv(tmp.file("bad.csv"));
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::ValidationError);
    CHECK(std::string(e.what()).find("pano") != std::string::npos);
  }
}

TEST_CASE("config parser handles comments, blanks and reports bad lines") {
  const auto kv = parse_config_text("# header\nalpha = 0.05\n\n seed=7 # trailing\n");
  CHECK(kv.at("alpha") == "0.05");
  CHECK(kv.at("seed") == "7");
  CHECK_THROWS_AS(parse_config_text("novalue\n"), Error);
}

TEST_CASE("bilinear resize: identity and mean preservation on constants") {
  Image img(3, 2, 3);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 10.0 * (c + 1);
    }
  }
  const Image same = bilinear_resize(img, 3, 2);
  CHECK(same.data == img.data);
  const Image up = bilinear_resize(img, 7, 5);
  CHECK(up.width == 7);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) CHECK(up.at(y, x, 1) == doctest::Approx(20.0).epsilon(1e-12));
  }
}

TEST_CASE("synthetic dataset: structure, determinism, degenerate noise") {
  SyntheticSpec spec;
  spec.n_images = 4;
  spec.image_width = 24;
  spec.image_height = 20;
  spec.observers = 2;
  spec.seed = 99;
  const SyntheticDataset a = generate_synthetic(spec);
  const SyntheticDataset b = generate_synthetic(spec);
  CHECK(a.image_ids == b.image_ids);
  for (size_t i = 0; i < a.images.size(); ++i) {
    CHECK(a.images[i].values == b.images[i].values);
    CHECK(a.saliency[i].values == b.saliency[i].values);
  }
  REQUIRE(a.scanpaths.size() == 8);
  for (size_t i = 0; i < a.scanpaths.size(); ++i) {
    CHECK(a.scanpaths[i].fixations.size() == b.scanpaths[i].fixations.size());
    CHECK(a.scanpaths[i].fixations[0].x == b.scanpaths[i].fixations[0].x);
    CHECK_NOTHROW(validate_scanpath(a.scanpaths[i]));
  }

  // nearly-zero observer noise puts fixations on the blob centers, ordered by
  // decreasing intensity (checked via the saliency peak)
  SyntheticSpec tight = spec;
  tight.blobs_min = tight.blobs_max = 1;
  tight.noise_sigma = 1e-12;
  const SyntheticDataset t = generate_synthetic(tight);
  for (const Scanpath& sp : t.scanpaths) {
    REQUIRE(sp.size() == 2);
    CHECK(sp.fixations[0].x == doctest::Approx(0.5).epsilon(1e-6));  // center start
  }

  TempDir tmp;
  write_synthetic(a, tmp.file("ds"));
  CHECK(fs::exists(tmp.path / "ds" / "images" / "img_0000.pgm"));
  CHECK(fs::exists(tmp.path / "ds" / "saliency" / "img_0003.pgm"));
  const auto loaded = load_scanpaths_planar((tmp.path / "ds" / "scanpaths.jsonl").string());
  CHECK(loaded.size() == a.scanpaths.size());
  // on-disk pixels match the in-memory dataset exactly
  const SaliencyMap img0 = read_pgm((tmp.path / "ds" / "images" / "img_0000.pgm").string());
  CHECK(img0.values == a.images[0].values);
}

TEST_CASE("checkpoint text round-trips bit-exactly") {
  ParamStore store;
  Rng rng(2024);
  Array& w = store.add("gen.w", {3, 4});
  for (double& v : w.data) v = rng.normal(0, 1) * std::pow(10.0, rng.uniform_int(-8, 8));
  Array& b = store.add("disc.b", {5});
  for (double& v : b.data) v = rng.uniform(-1, 1);
  store.add("meta.empty", {0});

  const std::string text = checkpoint_to_string(store);
  CHECK(text.rfind("pathgan-ckpt v1\n", 0) == 0);
  const ParamStore back = checkpoint_from_string(text);
  CHECK(back.names() == store.names());
  for (const std::string& name : store.names()) {
    CHECK(back.at(name).shape == store.at(name).shape);
    CHECK(back.at(name).data == store.at(name).data);
  }

  CHECK_THROWS_AS(checkpoint_from_string("wrong header\n"), Error);
  CHECK_THROWS_AS(checkpoint_from_string("pathgan-ckpt v1\nname 1 3 1.0 2.0\n"), Error);
}
