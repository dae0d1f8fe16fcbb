#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afem/adaptivity.hpp"
#include "afem/mesh.hpp"
#include "afem/wavefield.hpp"

namespace afem {

struct GeometryConfig {
  Box outer{{-0.8, -0.8, -0.8}, {0.8, 0.8, 0.8}};
  Box inner{{-0.7, -0.7, -0.7}, {0.7, 0.7, 0.7}};
  double h0 = 0.1;
  bool operator==(const GeometryConfig&) const = default;
};

struct TimeConfig {
  double t_final = 3.0;
  double dt = 0.0;  ///< 0 picks the CFL step
  bool operator==(const TimeConfig&) const = default;
};

struct SourceConfig {
  SourceSpec spec;
  std::vector<BoundarySide> observed{BoundarySide::front};
  bool operator==(const SourceConfig&) const = default;
};

struct ParamsConfig {
  double alpha = 0.01;
  double s = 1.0;
  double delta = 0.3;
  double eps_max = 5.0;
  double eps0 = 1.0;
  BcMode bc = BcMode::hybrid;
  bool operator==(const ParamsConfig&) const = default;
};

struct GaussianSpec {
  Vec3 center{};
  double amplitude = 1.0;
  double width = 0.2;  ///< exp(-|x - c|^2 / width)
  bool operator==(const GaussianSpec&) const = default;
};

struct SphereSpec {
  Vec3 center{};
  double diameter = 0.4;
  double contrast = 2.0;  ///< eps inside the ball
  bool operator==(const SphereSpec&) const = default;
};

enum class PhantomKind : std::uint8_t { background, gaussians, spheres };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::background;
  std::vector<GaussianSpec> gaussians;
  std::vector<SphereSpec> spheres;
  bool operator==(const PhantomSpec&) const = default;
};

enum class NoiseModel : std::uint8_t {
  additive_max,  ///< v + sigma A u, A = max |v| over the record
  relative,      ///< v (1 + sigma u)
};

struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 1;
  NoiseModel model = NoiseModel::additive_max;
  bool operator==(const NoiseConfig&) const = default;
};

struct DataConfig {
  bool same_mesh = false;  ///< generate on the inversion mesh and grid
  bool operator==(const DataConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool vtk = true;
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GeometryConfig geometry;
  TimeConfig time;
  std::vector<SourceConfig> sources{SourceConfig{}};
  ParamsConfig params;
  PhantomSpec phantom;
  NoiseConfig noise;
  DataConfig data;
  CgSettings cg;
  AdaptiveSettings adaptive;
  OutputConfig output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the offending key.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Full-size overrides: h0 = 0.05, tau = 0.006.
void apply_paper_scale(ExperimentConfig& config);

const char* to_string(PhantomKind kind);
const char* to_string(NoiseModel model);

}  // namespace afem
