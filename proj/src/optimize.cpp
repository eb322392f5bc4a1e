#include "mcfsing/optimize.hpp"

#include "mcfsing/errors.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <limits>

namespace mcfsing {

namespace {

struct Trampoline {
  const std::function<double(const Eigen::VectorXd&)>* f;
  Eigen::VectorXd scratch;
};

double call(const gsl_vector* v, void* params) {
  auto* t = static_cast<Trampoline*>(params);
  for (Eigen::Index i = 0; i < t->scratch.size(); ++i) t->scratch[i] = gsl_vector_get(v, i);
  const double value = (*t->f)(t->scratch);
  return std::isfinite(value) ? value : std::numeric_limits<double>::max();
}

struct GslErrorsOff {
  GslErrorsOff() : previous(gsl_set_error_handler_off()) {}
  ~GslErrorsOff() { gsl_set_error_handler(previous); }
  gsl_error_handler_t* previous;
};

}  // namespace

MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double step, int max_iterations,
                           double size_tolerance) {
  const auto n = static_cast<std::size_t>(x0.size());
  MinimizeResult out;
  if (n == 0) {
    out.x = x0;
    out.value = f(x0);
    out.converged = true;
    return out;
  }
  GslErrorsOff guard;
  Trampoline tramp{&f, Eigen::VectorXd(x0.size())};
  gsl_multimin_function fn{&call, n, &tramp};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[static_cast<Eigen::Index>(i)]);
    gsl_vector_set(ss, i, step);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(s);
    if (gsl_multimin_test_size(size, size_tolerance) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  out.iterations = it;
  out.x.resize(x0.size());
  for (std::size_t i = 0; i < n; ++i) out.x[static_cast<Eigen::Index>(i)] = gsl_vector_get(s->x, i);
  out.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(ss);
  return out;
}

double bessel_i_scaled(double nu, double z) {
  if (z < 0.0) throw InvalidArgument("scaled Bessel argument must be nonnegative");
  GslErrorsOff guard;
  if (nu == 0.0) return gsl_sf_bessel_I0_scaled(z);
  if (nu == 1.0) return gsl_sf_bessel_I1_scaled(z);
  if (nu == std::floor(nu)) return gsl_sf_bessel_In_scaled(static_cast<int>(nu), z);
  if (nu == -0.5) {
    // I_{-1/2}(z) = sqrt(2/(pi z)) cosh z
    if (z == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 / (M_PI * z)) * 0.5 * (1.0 + std::exp(-2.0 * z));
  }
  gsl_sf_result res;
  if (gsl_sf_bessel_Inu_scaled_e(nu, z, &res) != GSL_SUCCESS) {
    throw NumericalFailure("scaled Bessel evaluation failed");
  }
  return res.val;
}

}  // namespace mcfsing
