#include "afem/optimizer.hpp"

#include <chrono>
#include <cmath>

#include "afem/error.hpp"

namespace afem {

CgCoefficients cg_coefficients(std::span<const double> w, std::span<const double> grad_now,
                               std::span<const double> grad_prev, std::span<const double> dir_prev, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("cg_coefficients: alpha must be positive");
  if (grad_now.size() != w.size()) throw MismatchError("cg_coefficients: size mismatch");
  CgCoefficients out;
  const double now2 = weighted_dot(w, grad_now, grad_now);
  const bool first = grad_prev.empty();
  if (!first) {
    if (grad_prev.size() != w.size() || dir_prev.size() != w.size()) {
      throw MismatchError("cg_coefficients: size mismatch");
    }
    const double prev2 = weighted_dot(w, grad_prev, grad_prev);
    if (prev2 > 0.0) {
      out.beta = now2 / prev2;
    } else {
      out.restart = now2 > 0.0;
    }
  }
  out.dir.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.dir[i] = -grad_now[i] + (out.beta != 0.0 ? out.beta * dir_prev[i] : 0.0);
  }
  const double d2 = weighted_dot(w, out.dir, out.dir);
  if (d2 == 0.0) {
    out.converged = true;
    return out;
  }
  out.gamma = -weighted_dot(w, grad_now, out.dir) / (alpha * d2);
  return out;
}

const char* to_string(CgStop stop) {
  switch (stop) {
    case CgStop::gradient_tol: return "gradient_tol";
    case CgStop::stagnation: return "stagnation";
    case CgStop::max_iter: return "max_iter";
    case CgStop::no_descent: return "no_descent";
    case CgStop::zero_direction: return "zero_direction";
  }
  return "unknown";
}

CgState run_cg(const TetMesh& mesh, const PermittivityField& eps_init, const InverseProblem& problem,
               const CgSettings& settings) {
  if (settings.max_iter < 1) throw ConfigError("run_cg: max_iter must be at least 1");
  if (!(settings.theta >= 0.0)) throw ConfigError("run_cg: theta must be nonnegative");
  if (!is_admissible(eps_init, mesh, settings.eps_max)) throw ConfigError("run_cg: initial permittivity not admissible");
  if (problem.data.empty()) throw ConfigError("run_cg: no data");

  using clock = std::chrono::steady_clock;
  const auto w = domain_weights(mesh);
  const double alpha = problem.params.alpha;

  CgState st;
  st.eps = eps_init;
  auto t0 = clock::now();
  st.last = evaluate(mesh, st.eps, problem);
  st.grad = st.last.gradient;
  st.min_grad_norm = st.last.gradient_norm;
  double eps_norm = weighted_norm(w, st.eps.values);
  st.history.push_back({0, st.last.value, st.last.gradient_norm, 0.0, 0.0, eps_norm, 0,
                        std::chrono::duration<double>(clock::now() - t0).count()});

  std::vector<double> grad_prev, dir_prev;
  int quiet = 0;  // consecutive iterations with small change of |eps|
  while (true) {
    if (st.last.gradient_norm <= settings.theta) {
      st.stop = CgStop::gradient_tol;
      break;
    }
    if (st.iter >= settings.max_iter) {
      st.stop = CgStop::max_iter;
      break;
    }
    t0 = clock::now();
    auto coef = cg_coefficients(w, st.grad.values, grad_prev, dir_prev, alpha);
    if (coef.converged) {
      st.stop = CgStop::zero_direction;
      break;
    }

    double gamma = coef.gamma;
    bool accepted = false;
    int halvings = 0;
    PermittivityField trial_eps;
    for (; halvings <= settings.safeguard; ++halvings, gamma *= 0.5) {
      std::vector<double> x(st.eps.values);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += gamma * coef.dir[i];
      trial_eps = project_admissible(x, mesh, settings.eps_max);
      // value-only trials; the adjoint runs once the step is accepted
      if (evaluate_value(mesh, trial_eps, problem) <= st.last.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      st.stop = CgStop::no_descent;
      break;
    }

    grad_prev = std::move(st.grad.values);
    dir_prev = coef.dir;
    st.dir = std::move(coef.dir);
    st.eps = std::move(trial_eps);
    st.last = evaluate(mesh, st.eps, problem);
    st.grad = st.last.gradient;
    st.min_grad_norm = std::min(st.min_grad_norm, st.last.gradient_norm);
    ++st.iter;

    const double new_norm = weighted_norm(w, st.eps.values);
    const double change = eps_norm > 0.0 ? std::abs(new_norm - eps_norm) / eps_norm : std::abs(new_norm);
    eps_norm = new_norm;
    st.history.push_back({st.iter, st.last.value, st.last.gradient_norm, gamma, coef.beta, eps_norm, halvings,
                          std::chrono::duration<double>(clock::now() - t0).count()});
    quiet = change < settings.stagnation_rtol ? quiet + 1 : 0;
    if (settings.stagnation_window > 0 && quiet >= settings.stagnation_window) {
      st.stop = CgStop::stagnation;
      break;
    }
  }
  return st;
}

}  // namespace afem
