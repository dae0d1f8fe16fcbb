#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "afem/config.hpp"
#include "afem/error.hpp"
#include "afem/experiment.hpp"
#include "afem/io.hpp"
#include "oracles.hpp"

using namespace afem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("afem_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Coarse configuration that runs in well under a second.
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.geometry.outer = {{-0.8, -0.8, -0.8}, {0.8, 0.8, 0.8}};
  c.geometry.inner = {{-0.4, -0.4, -0.4}, {0.4, 0.4, 0.4}};
  c.geometry.h0 = 0.4;
  c.time.t_final = 2.0;
  c.params.delta = 0.2;
  c.sources[0].spec.omega = 5.0;
  c.sources[0].observed = {BoundarySide::front, BoundarySide::back};
  c.phantom.kind = PhantomKind::spheres;
  c.phantom.spheres = {SphereSpec{{0.0, 0.0, 0.0}, 0.3, 2.0}};
  c.noise.sigma = 0.05;
  c.noise.seed = 4;
  c.cg.max_iter = 2;
  c.adaptive.max_levels = 1;
  c.output.vtk = true;
  return c;
}

BoundaryObservation random_record(std::size_t nodes, std::size_t width, std::uint64_t seed) {
  BoundaryObservation r;
  r.grid = TimeGrid::uniform(1.0, nodes - 1);
  for (std::size_t n = 0; n < nodes; ++n) r.values.push_back(oracle::random_vector(width, seed + n));
  return r;
}

}  // namespace

TEST_CASE("config text round trip") {
  auto c = tiny_config();
  c.name = "round_trip";
  c.sources.push_back(SourceConfig{SourceSpec{7.0, 0.5, BoundarySide::back, 0}, {BoundarySide::back}});
  c.phantom.kind = PhantomKind::gaussians;
  c.phantom.spheres.clear();  // only the active kind is written
  c.phantom.gaussians = {GaussianSpec{{0.1, 0.0, 0.0}, 1.0, 0.2}, GaussianSpec{{-0.1, 0.2, 0.0}, 0.5, 0.1}};
  c.params.bc = BcMode::neumann;
  c.noise.model = NoiseModel::relative;
  c.adaptive.variant = Variant::second;
  c.adaptive.theta1 = 1.0 / 3.0;
  c.cg.theta = 1e-7;
  const auto text = serialize_config(c);
  const auto back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back == c);
}

TEST_CASE("config defaults and parsing") {
  const auto c = parse_config(
      "[time]\n"
      "t_final = 2\n"
      "[source1]\n"
      "side = back\n"
      "observe = front back\n"
      "[phantom]\n"
      "kind = gaussians\n"
      "count = 2\n"
      "item1_center = 0.3 0 0\n"
      "item2_center = -0.4 0.2 0\n");
  CHECK(c.time.t_final == 2.0);
  CHECK(c.params.delta == doctest::Approx(0.2));
  CHECK(c.sources.size() == 1);
  CHECK(c.sources[0].spec.side == BoundarySide::back);
  CHECK(c.sources[0].spec.component == 1);
  CHECK(c.sources[0].observed == std::vector<BoundarySide>{BoundarySide::front, BoundarySide::back});
  REQUIRE(c.phantom.gaussians.size() == 2);
  CHECK(c.phantom.gaussians[1].center == Vec3{-0.4, 0.2, 0.0});
  CHECK(c.phantom.gaussians[1].width == 0.2);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("config validation") {
  auto expect_key = [](const ExperimentConfig& c, const std::string& key) {
    try {
      validate(c);
      FAIL("accepted an invalid config");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  auto c = tiny_config();
  c.geometry.h0 = 0.0;
  expect_key(c, "geometry.h0");
  c = tiny_config();
  c.params.alpha = -1.0;
  expect_key(c, "params.alpha");
  c = tiny_config();
  c.params.delta = 5.0;
  expect_key(c, "params.delta");
  c = tiny_config();
  c.sources[0].observed.clear();
  expect_key(c, "source1.observe");
  c = tiny_config();
  c.adaptive.beta = 1.0;
  expect_key(c, "adaptive.beta");
  c = tiny_config();
  c.phantom.spheres[0].center = {0.7, 0.0, 0.0};
  expect_key(c, "phantom");
  c = tiny_config();
  c.geometry.inner.hi = {0.9, 0.4, 0.4};
  expect_key(c, "geometry.inner");
  CHECK_THROWS_AS(parse_config("[phantom]\nkind = cubes\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[geometry]\nh0 = abc\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/afem.ini"), std::exception);
}

TEST_CASE("full-size overrides") {
  auto c = tiny_config();
  apply_paper_scale(c);
  CHECK(c.geometry.h0 == 0.05);
  CHECK(c.time.dt == 0.006);
}

TEST_CASE("phantoms") {
  const Box inner{{-0.7, -0.7, -0.7}, {0.7, 0.7, 0.7}};
  PhantomSpec g;
  g.kind = PhantomKind::gaussians;
  g.gaussians = {GaussianSpec{{0.3, 0.0, 0.0}, 1.0, 0.2}, GaussianSpec{{-0.4, 0.2, 0.0}, 1.0, 0.2}};
  const double x1 = phantom_value(g, inner, {0.3, 0.0, 0.0});
  CHECK(x1 == doctest::Approx(2.0 + std::exp(-0.53 / 0.2)).epsilon(1e-14));
  CHECK(x1 == doctest::Approx(2.07).epsilon(0.005));
  CHECK(phantom_value(g, inner, {0.75, 0.0, 0.0}) == 1.0);

  PhantomSpec s;
  s.kind = PhantomKind::spheres;
  s.spheres = {SphereSpec{{0.2, 0.2, 0.2}, 0.2, 2.5}};
  CHECK(phantom_value(s, inner, {0.2, 0.2, 0.2}) == 2.5);
  CHECK(phantom_value(s, inner, {0.2, 0.2, 0.35}) == 1.0);
  CHECK(phantom_value(PhantomSpec{}, inner, {0.0, 0.0, 0.0}) == 1.0);

  const auto mesh = build_uniform_mesh({{-0.8, -0.8, -0.8}, {0.8, 0.8, 0.8}}, 0.2, {{-0.4, -0.4, -0.4}, {0.4, 0.4, 0.4}});
  s.spheres[0].contrast = 9.0;
  const auto f = synthesize_phantom(s, mesh, 5.0);
  CHECK(is_admissible(f, mesh, 5.0));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const bool hit = norm(mesh.vertex(i) - Vec3{0.2, 0.2, 0.2}) <= 0.1;
    CHECK(f.values[i] == ((hit && mesh.is_free_vertex(i)) ? 5.0 : 1.0));
  }
}

TEST_CASE("noise") {
  const auto clean = random_record(40, 60, 1);
  CHECK(add_noise(clean, 0.0, 3).values == clean.values);
  const auto a = add_noise(clean, 0.1, 3), b = add_noise(clean, 0.1, 3), c = add_noise(clean, 0.1, 4);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  double amp = 0.0;
  for (const auto& row : clean.values) {
    for (double v : row) amp = std::max(amp, std::abs(v));
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < clean.values.size(); ++n) {
    for (std::size_t j = 0; j < clean.values[n].size(); ++j) {
      const double d = a.values[n][j] - clean.values[n][j];
      CHECK(std::abs(d) <= 0.1 * amp);
      sum += d;
      ++count;
    }
  }
  // uniform on [-sigma A, sigma A]: standard error sigma A / sqrt(3 count)
  CHECK(std::abs(sum / count) <= 3.0 * 0.1 * amp / std::sqrt(3.0 * count));
  const auto rel = add_noise(clean, 0.1, 3, NoiseModel::relative);
  for (std::size_t n = 0; n < clean.values.size(); ++n) {
    for (std::size_t j = 0; j < clean.values[n].size(); ++j) {
      CHECK(std::abs(rel.values[n][j] - clean.values[n][j]) <= 0.1 * std::abs(clean.values[n][j]) + 1e-15);
    }
  }
  CHECK_THROWS_AS(add_noise(clean, -0.1, 1), ConfigError);
}

TEST_CASE("relative error") {
  const auto mesh = build_uniform_mesh({{0, 0, 0}, {1.5, 1.5, 1.5}}, 0.5);
  const auto one = constant_permittivity(mesh, 1.0);
  CHECK(relative_error(one, one, mesh) == 0.0);
  const auto two = constant_permittivity(mesh, 2.0);
  CHECK(relative_error(two, one, mesh) == doctest::Approx(1.0));
  CHECK(relative_error(one, two, mesh) == doctest::Approx(0.5));
}

TEST_CASE("number formatting") {
  for (double v : {0.0, 1.0, -0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, 0.006, 123456.789}) {
    const auto t = format_double(v);
    CHECK(parse_double(t) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double("2.5e-1") == 0.25);
  CHECK_THROWS(parse_double("1.0x"));
  CHECK_THROWS(parse_double(""));
}

TEST_CASE("sha256 and manifest") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto dir = scratch("manifest");
  write_file(dir / "a.txt", "abc");
  write_file(dir / "b.txt", "");
  write_manifest(dir / "manifest.txt", {{"seed", "4"}}, dir, {"a.txt", "b.txt"});
  const auto text = read_file(dir / "manifest.txt");
  CHECK(text.find("seed = 4\n") != std::string::npos);
  CHECK(text.find("file a.txt sha256 ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad\n") !=
        std::string::npos);
  CHECK(text.find("file b.txt sha256 e3b0c442") != std::string::npos);
  CHECK(sha256_file(dir / "a.txt") == sha256_hex("abc"));
  fs::remove_all(dir);
}

TEST_CASE("data generation") {
  auto c = tiny_config();
  const auto mesh = build_inversion_mesh(c);
  CHECK(mesh.num_tets() == 384);
  c.data.same_mesh = true;
  const auto same = generate_data(c, mesh);
  CHECK(same.mesh.id() == mesh.id());
  c.data.same_mesh = false;
  const auto fine = generate_data(c, mesh);
  CHECK(fine.mesh.num_tets() == 8 * mesh.num_tets());
  REQUIRE(fine.records.size() == 1);
  CHECK(fine.records[0].grid.dt < same.records[0].grid.dt);

  const auto moved = resample_observation(fine.records[0], fine.mesh, mesh, same.records[0].grid);
  CHECK(moved.vertices == same.records[0].vertices);
  REQUIRE(moved.values.size() == same.records[0].values.size());
  double diff = 0.0, size = 0.0;
  for (std::size_t n = 0; n < moved.values.size(); ++n) {
    diff = std::max(diff, oracle::max_abs_diff(moved.values[n], same.records[0].values[n]));
    for (double v : same.records[0].values[n]) size = std::max(size, std::abs(v));
  }
  // a finer solve gives different but comparable data
  CHECK(diff > 0.0);
  CHECK(diff < size);

  c.sources[0].spec.amplitude = 0.0;
  c.phantom.kind = PhantomKind::background;
  const auto silent = generate_data(c, mesh);
  for (const auto& row : silent.records[0].values) {
    for (double v : row) CHECK(v == 0.0);
  }
}

TEST_CASE("experiment artifacts") {
  const auto c = tiny_config();
  const auto dir = scratch("experiment");
  const auto r = run_experiment(c, dir);
  CHECK(r.rel_errors.size() == r.run.records.size());
  CHECK(r.run.k_rec == static_cast<int>(r.run.records.size()) - 1);
  for (const auto& f : r.files) CHECK(fs::exists(dir / f));
  CHECK(fs::exists(dir / "manifest.txt"));
  const auto manifest = read_file(dir / "manifest.txt");
  for (const auto& f : r.files) CHECK(manifest.find("file " + f + " sha256 " + sha256_file(dir / f)) != std::string::npos);

  const auto rows = read_csv(dir / "summary.csv");
  REQUIRE(rows.size() == r.run.records.size() + 1);
  CHECK(rows[0][0] == "level");
  CHECK(rows[0][6] == "error_percent");
  for (std::size_t k = 0; k < r.run.records.size(); ++k) {
    CHECK(parse_double(rows[k + 1][6]) == doctest::Approx(100.0 * r.rel_errors[k]));
  }
  const auto first = read_file(dir / "summary.csv");
  const auto again = run_experiment(c, dir);
  CHECK(read_file(dir / "summary.csv") == first);
  fs::remove_all(dir);

  auto stop = c;
  stop.adaptive.theta1 = std::numeric_limits<double>::infinity();
  const auto none = run_experiment(stop, "");
  CHECK(none.run.k_rec == 0);
  CHECK(none.files.empty());
}
