#include "afem/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "afem/error.hpp"
#include "afem/io.hpp"

namespace afem {

namespace pt = boost::property_tree;

const char* to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::background: return "background";
    case PhantomKind::gaussians: return "gaussians";
    case PhantomKind::spheres: return "spheres";
  }
  return "unknown";
}

const char* to_string(NoiseModel model) { return model == NoiseModel::additive_max ? "additive_max" : "relative"; }

namespace {

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "background") return PhantomKind::background;
  if (s == "gaussians") return PhantomKind::gaussians;
  if (s == "spheres") return PhantomKind::spheres;
  throw ConfigError("phantom.kind: unknown kind '" + s + "'");
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "additive_max") return NoiseModel::additive_max;
  if (s == "relative") return NoiseModel::relative;
  throw ConfigError("noise.model: unknown model '" + s + "'");
}

// Keys are looked up with '/' as path separator so dotted names stay literal.
pt::ptree::path_type key(const std::string& section, const std::string& name) {
  return pt::ptree::path_type(section + "/" + name, '/');
}

std::string text_or(const pt::ptree& tree, const std::string& section, const std::string& name,
                    const std::string& fallback) {
  return tree.get<std::string>(key(section, name), fallback);
}

double number(const pt::ptree& tree, const std::string& section, const std::string& name, double fallback) {
  const auto v = tree.get_optional<std::string>(key(section, name));
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const ConfigError&) {
    throw ConfigError(section + "." + name + ": not a number '" + *v + "'");
  }
}

long long integer(const pt::ptree& tree, const std::string& section, const std::string& name, long long fallback) {
  const auto v = tree.get_optional<std::string>(key(section, name));
  if (!v) return fallback;
  long long out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError(section + "." + name + ": not an integer '" + *v + "'");
  }
  return out;
}

bool boolean(const pt::ptree& tree, const std::string& section, const std::string& name, bool fallback) {
  const auto v = tree.get_optional<std::string>(key(section, name));
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ConfigError(section + "." + name + ": expected true or false");
}

Vec3 vec3(const pt::ptree& tree, const std::string& section, const std::string& name, const Vec3& fallback) {
  const auto v = tree.get_optional<std::string>(key(section, name));
  if (!v) return fallback;
  std::istringstream ss(*v);
  Vec3 out{};
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    if (!(ss >> tok)) throw ConfigError(section + "." + name + ": expected three numbers");
    try {
      out[i] = parse_double(tok);
    } catch (const ConfigError&) {
      throw ConfigError(section + "." + name + ": not a number '" + tok + "'");
    }
  }
  if (ss >> tok) throw ConfigError(section + "." + name + ": expected three numbers");
  return out;
}

std::vector<BoundarySide> sides(const pt::ptree& tree, const std::string& section, const std::string& name) {
  const auto v = tree.get_optional<std::string>(key(section, name));
  if (!v) return {BoundarySide::front};
  std::istringstream ss(*v);
  std::vector<BoundarySide> out;
  std::string tok;
  while (ss >> tok) {
    try {
      out.push_back(boundary_side_from_string(tok));
    } catch (const std::exception&) {
      throw ConfigError(section + "." + name + ": unknown boundary side '" + tok + "'");
    }
  }
  return out;
}

std::string vec_text(const Vec3& v) {
  return format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]);
}

void put(pt::ptree& tree, const std::string& section, const std::string& name, const std::string& value) {
  tree.put(key(section, name), value);
}

void put(pt::ptree& tree, const std::string& section, const std::string& name, double value) {
  put(tree, section, name, format_double(value));
}

void put(pt::ptree& tree, const std::string& section, const std::string& name, bool value) {
  put(tree, section, name, std::string(value ? "true" : "false"));
}

void put_int(pt::ptree& tree, const std::string& section, const std::string& name, long long value) {
  put(tree, section, name, std::to_string(value));
}

}  // namespace

void validate(const ExperimentConfig& c) {
  const auto& g = c.geometry;
  for (int i = 0; i < 3; ++i) {
    if (!(g.outer.lo[i] < g.outer.hi[i])) throw ConfigError("geometry.outer: empty box");
    if (!(g.inner.lo[i] >= g.outer.lo[i] && g.inner.hi[i] <= g.outer.hi[i] && g.inner.lo[i] < g.inner.hi[i])) {
      throw ConfigError("geometry.inner: must be a nonempty box inside geometry.outer");
    }
  }
  if (!(g.h0 > 0.0)) throw ConfigError("geometry.h0: must be positive");
  if (!(c.time.t_final > 0.0)) throw ConfigError("time.t_final: must be positive");
  if (!(c.time.dt >= 0.0)) throw ConfigError("time.dt: must be nonnegative");
  if (c.sources.empty()) throw ConfigError("source: at least one source is required");
  for (std::size_t i = 0; i < c.sources.size(); ++i) {
    const auto& s = c.sources[i];
    const std::string sec = "source" + std::to_string(i + 1);
    if (!(s.spec.omega > 0.0)) throw ConfigError(sec + ".omega: must be positive");
    if (s.spec.component < 0 || s.spec.component > 2) throw ConfigError(sec + ".component: must be 1, 2 or 3");
    if (s.spec.side == BoundarySide::lateral) throw ConfigError(sec + ".side: must be front or back");
    if (s.observed.empty()) throw ConfigError(sec + ".observe: at least one side is required");
  }
  const auto& p = c.params;
  if (!(p.alpha > 0.0)) throw ConfigError("params.alpha: must be positive");
  if (!(p.s >= 1.0)) throw ConfigError("params.s: must be at least 1");
  if (!(p.delta > 0.0 && p.delta < c.time.t_final)) throw ConfigError("params.delta: must lie in (0, t_final)");
  if (!(p.eps_max > 1.0)) throw ConfigError("params.eps_max: must exceed 1");
  if (!(p.eps0 >= 1.0 && p.eps0 <= p.eps_max)) throw ConfigError("params.eps0: must lie in [1, eps_max]");
  for (const auto& ga : c.phantom.gaussians) {
    if (!g.inner.contains(ga.center)) throw ConfigError("phantom: gaussian center outside the inner box");
    if (!(ga.width > 0.0)) throw ConfigError("phantom: gaussian width must be positive");
  }
  for (const auto& sp : c.phantom.spheres) {
    if (!g.inner.contains(sp.center)) throw ConfigError("phantom: sphere center outside the inner box");
    if (!(sp.diameter > 0.0)) throw ConfigError("phantom: sphere diameter must be positive");
    if (!(sp.contrast >= 1.0)) throw ConfigError("phantom: sphere contrast must be at least 1");
  }
  if (!(c.noise.sigma >= 0.0)) throw ConfigError("noise.sigma: must be nonnegative");
  if (!(c.cg.theta >= 0.0)) throw ConfigError("cg.theta: must be nonnegative");
  if (c.cg.max_iter < 1) throw ConfigError("cg.max_iter: must be at least 1");
  if (c.cg.safeguard < 0) throw ConfigError("cg.safeguard: must be nonnegative");
  const auto& a = c.adaptive;
  if (!(a.beta > 0.0 && a.beta < 1.0)) throw ConfigError("adaptive.beta: must lie in (0, 1)");
  if (!(a.beta_tilde > 0.0 && a.beta_tilde < 1.0)) throw ConfigError("adaptive.beta_tilde: must lie in (0, 1)");
  if (a.max_levels < 0) throw ConfigError("adaptive.max_levels: must be nonnegative");
  if (c.output.dir.empty()) throw ConfigError("output.dir: must not be empty");
}

ExperimentConfig parse_config(const std::string& content) {
  pt::ptree tree;
  std::istringstream in(content);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c;
  c.name = text_or(tree, "experiment", "name", c.name);

  c.geometry.outer.lo = vec3(tree, "geometry", "outer_lo", c.geometry.outer.lo);
  c.geometry.outer.hi = vec3(tree, "geometry", "outer_hi", c.geometry.outer.hi);
  c.geometry.inner.lo = vec3(tree, "geometry", "inner_lo", c.geometry.inner.lo);
  c.geometry.inner.hi = vec3(tree, "geometry", "inner_hi", c.geometry.inner.hi);
  c.geometry.h0 = number(tree, "geometry", "h0", c.geometry.h0);

  c.time.t_final = number(tree, "time", "t_final", c.time.t_final);
  c.time.dt = number(tree, "time", "dt", c.time.dt);

  c.sources.clear();
  for (int i = 1; tree.find("source" + std::to_string(i)) != tree.not_found(); ++i) {
    const std::string sec = "source" + std::to_string(i);
    SourceConfig s;
    s.spec.omega = number(tree, sec, "omega", s.spec.omega);
    s.spec.amplitude = number(tree, sec, "amplitude", s.spec.amplitude);
    try {
      s.spec.side = boundary_side_from_string(text_or(tree, sec, "side", "front"));
    } catch (const std::exception&) {
      throw ConfigError(sec + ".side: unknown boundary side");
    }
    s.spec.component = static_cast<int>(integer(tree, sec, "component", 2)) - 1;
    s.observed = sides(tree, sec, "observe");
    c.sources.push_back(s);
  }
  if (c.sources.empty()) c.sources.push_back(SourceConfig{});

  c.params.alpha = number(tree, "params", "alpha", c.params.alpha);
  c.params.s = number(tree, "params", "s", c.params.s);
  c.params.delta = number(tree, "params", "delta", 0.1 * c.time.t_final);
  c.params.eps_max = number(tree, "params", "eps_max", c.params.eps_max);
  c.params.eps0 = number(tree, "params", "eps0", c.params.eps0);
  c.params.bc = bc_mode_from_string(text_or(tree, "params", "bc", to_string(c.params.bc)));

  c.phantom.kind = phantom_kind_from_string(text_or(tree, "phantom", "kind", "background"));
  const int count = static_cast<int>(integer(tree, "phantom", "count", 0));
  for (int i = 1; i <= count; ++i) {
    const std::string p = "item" + std::to_string(i) + "_";
    if (c.phantom.kind == PhantomKind::gaussians) {
      GaussianSpec ga;
      ga.center = vec3(tree, "phantom", p + "center", ga.center);
      ga.amplitude = number(tree, "phantom", p + "amplitude", ga.amplitude);
      ga.width = number(tree, "phantom", p + "width", ga.width);
      c.phantom.gaussians.push_back(ga);
    } else if (c.phantom.kind == PhantomKind::spheres) {
      SphereSpec sp;
      sp.center = vec3(tree, "phantom", p + "center", sp.center);
      sp.diameter = number(tree, "phantom", p + "diameter", sp.diameter);
      sp.contrast = number(tree, "phantom", p + "contrast", sp.contrast);
      c.phantom.spheres.push_back(sp);
    }
  }

  c.noise.sigma = number(tree, "noise", "sigma", c.noise.sigma);
  c.noise.seed = static_cast<std::uint64_t>(integer(tree, "noise", "seed", static_cast<long long>(c.noise.seed)));
  c.noise.model = noise_model_from_string(text_or(tree, "noise", "model", to_string(c.noise.model)));

  c.data.same_mesh = boolean(tree, "data", "same_mesh", c.data.same_mesh);

  c.cg.theta = number(tree, "cg", "theta", c.cg.theta);
  c.cg.max_iter = static_cast<int>(integer(tree, "cg", "max_iter", c.cg.max_iter));
  c.cg.stagnation_window = static_cast<int>(integer(tree, "cg", "stagnation_window", c.cg.stagnation_window));
  c.cg.stagnation_rtol = number(tree, "cg", "stagnation_rtol", c.cg.stagnation_rtol);
  c.cg.safeguard = static_cast<int>(integer(tree, "cg", "safeguard", c.cg.safeguard));
  c.cg.eps_max = c.params.eps_max;

  c.adaptive.variant = variant_from_string(text_or(tree, "adaptive", "variant", to_string(c.adaptive.variant)));
  c.adaptive.beta = number(tree, "adaptive", "beta", c.adaptive.beta);
  c.adaptive.beta_tilde = number(tree, "adaptive", "beta_tilde", c.adaptive.beta_tilde);
  c.adaptive.theta1 = number(tree, "adaptive", "theta1", c.adaptive.theta1);
  c.adaptive.theta2 = number(tree, "adaptive", "theta2", c.adaptive.theta2);
  c.adaptive.max_levels = static_cast<int>(integer(tree, "adaptive", "max_levels", c.adaptive.max_levels));
  c.adaptive.shifted_coefficient = boolean(tree, "adaptive", "shifted", c.adaptive.shifted_coefficient);

  c.output.dir = text_or(tree, "output", "dir", c.output.dir);
  c.output.vtk = boolean(tree, "output", "vtk", c.output.vtk);

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  pt::ptree tree;
  put(tree, "experiment", "name", c.name);
  put(tree, "geometry", "outer_lo", vec_text(c.geometry.outer.lo));
  put(tree, "geometry", "outer_hi", vec_text(c.geometry.outer.hi));
  put(tree, "geometry", "inner_lo", vec_text(c.geometry.inner.lo));
  put(tree, "geometry", "inner_hi", vec_text(c.geometry.inner.hi));
  put(tree, "geometry", "h0", c.geometry.h0);
  put(tree, "time", "t_final", c.time.t_final);
  put(tree, "time", "dt", c.time.dt);
  for (std::size_t i = 0; i < c.sources.size(); ++i) {
    const std::string sec = "source" + std::to_string(i + 1);
    const auto& s = c.sources[i];
    put(tree, sec, "omega", s.spec.omega);
    put(tree, sec, "amplitude", s.spec.amplitude);
    put(tree, sec, "side", std::string(to_string(s.spec.side)));
    put_int(tree, sec, "component", s.spec.component + 1);
    std::string obs;
    for (auto side : s.observed) obs += (obs.empty() ? "" : " ") + std::string(to_string(side));
    put(tree, sec, "observe", obs);
  }
  put(tree, "params", "alpha", c.params.alpha);
  put(tree, "params", "s", c.params.s);
  put(tree, "params", "delta", c.params.delta);
  put(tree, "params", "eps_max", c.params.eps_max);
  put(tree, "params", "eps0", c.params.eps0);
  put(tree, "params", "bc", std::string(to_string(c.params.bc)));

  put(tree, "phantom", "kind", std::string(to_string(c.phantom.kind)));
  if (c.phantom.kind == PhantomKind::gaussians) {
    put_int(tree, "phantom", "count", static_cast<long long>(c.phantom.gaussians.size()));
    for (std::size_t i = 0; i < c.phantom.gaussians.size(); ++i) {
      const std::string p = "item" + std::to_string(i + 1) + "_";
      const auto& ga = c.phantom.gaussians[i];
      put(tree, "phantom", p + "center", vec_text(ga.center));
      put(tree, "phantom", p + "amplitude", ga.amplitude);
      put(tree, "phantom", p + "width", ga.width);
    }
  } else if (c.phantom.kind == PhantomKind::spheres) {
    put_int(tree, "phantom", "count", static_cast<long long>(c.phantom.spheres.size()));
    for (std::size_t i = 0; i < c.phantom.spheres.size(); ++i) {
      const std::string p = "item" + std::to_string(i + 1) + "_";
      const auto& sp = c.phantom.spheres[i];
      put(tree, "phantom", p + "center", vec_text(sp.center));
      put(tree, "phantom", p + "diameter", sp.diameter);
      put(tree, "phantom", p + "contrast", sp.contrast);
    }
  }

  put(tree, "noise", "sigma", c.noise.sigma);
  put_int(tree, "noise", "seed", static_cast<long long>(c.noise.seed));
  put(tree, "noise", "model", std::string(to_string(c.noise.model)));
  put(tree, "data", "same_mesh", c.data.same_mesh);

  put(tree, "cg", "theta", c.cg.theta);
  put_int(tree, "cg", "max_iter", c.cg.max_iter);
  put_int(tree, "cg", "stagnation_window", c.cg.stagnation_window);
  put(tree, "cg", "stagnation_rtol", c.cg.stagnation_rtol);
  put_int(tree, "cg", "safeguard", c.cg.safeguard);

  put(tree, "adaptive", "variant", std::string(to_string(c.adaptive.variant)));
  put(tree, "adaptive", "beta", c.adaptive.beta);
  put(tree, "adaptive", "beta_tilde", c.adaptive.beta_tilde);
  put(tree, "adaptive", "theta1", c.adaptive.theta1);
  put(tree, "adaptive", "theta2", c.adaptive.theta2);
  put_int(tree, "adaptive", "max_levels", c.adaptive.max_levels);
  put(tree, "adaptive", "shifted", c.adaptive.shifted_coefficient);

  put(tree, "output", "dir", c.output.dir);
  put(tree, "output", "vtk", c.output.vtk);

  std::ostringstream out;
  pt::write_ini(out, tree);
  return out.str();
}

void apply_paper_scale(ExperimentConfig& config) {
  config.geometry.h0 = 0.05;
  config.time.dt = 0.006;
}

}  // namespace afem
