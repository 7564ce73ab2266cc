#include "hrbm/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

void silence_gsl() {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

struct Thunk {
  const std::function<double(double)>* f;
  long calls = 0;
};

double trampoline(double x, void* p) {
  auto* t = static_cast<Thunk*>(p);
  ++t->calls;
  return (*t->f)(x);
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(x_lo < x_hi) || !(delta_lo < delta_hi)) throw InputError("quadrature box is empty");
  if (!(abs_tol > 0.0)) throw InputError("quadrature abs_tol must be positive");
  if (max_refinements < 1) throw InputError("quadrature max_refinements must be >= 1");
}

QuadratureConfig QuadratureConfig::enlarged(double factor) const {
  QuadratureConfig q = *this;
  const double hx = 0.5 * (x_hi - x_lo) * factor;
  const double hd = 0.5 * (delta_hi - delta_lo) * factor;
  q.x_lo -= hx;
  q.x_hi += hx;
  q.delta_lo -= hd;
  q.delta_hi += hd;
  return q;
}

Integral integrate_1d(const std::function<double(double)>& f, double a, double b, double abs_tol,
                      int max_refinements) {
  silence_gsl();
  std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(static_cast<std::size_t>(max_refinements)));
  Thunk thunk{&f};
  gsl_function g{&trampoline, &thunk};
  Integral out;
  const int status = gsl_integration_qag(&g, a, b, abs_tol, 0.0, static_cast<std::size_t>(max_refinements),
                                         GSL_INTEG_GAUSS21, ws.get(), &out.value, &out.abs_error);
  out.evaluations = thunk.calls;
  // A round-off report with the target already met is a success.
  out.converged = status == GSL_SUCCESS || (status == GSL_EROUND && out.abs_error <= abs_tol);
  return out;
}

Integral integrate_semi_infinite(const std::function<double(double)>& f, double a, double abs_tol,
                                 int max_refinements, std::vector<double> breakpoints) {
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > cuts.back()) cuts.push_back(c);
  }
  const double share = abs_tol / static_cast<double>(cuts.size());
  Integral total;
  auto add = [&](const Integral& r) {
    total.value += r.value;
    total.abs_error += r.abs_error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    add(integrate_1d(f, cuts[i], cuts[i + 1], share, max_refinements));
  }
  const double c = cuts.back();
  auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    return f(c - std::log(one_minus)) / one_minus;
  };
  add(integrate_1d(mapped, 0.0, 1.0, share, max_refinements));
  return total;
}

Integral integrate_box(const std::function<double(double, double)>& f, const QuadratureConfig& q) {
  q.validate();
  const double width = q.x_hi - q.x_lo;
  const double inner_tol = 0.5 * q.abs_tol / width;
  bool inner_ok = true;
  double worst_inner = 0.0;
  long evaluations = 0;
  auto outer = [&](double x) {
    auto inner = [&](double delta) { return f(x, x - delta); };
    const Integral r = integrate_1d(inner, q.delta_lo, q.delta_hi, inner_tol, q.max_refinements);
    inner_ok = inner_ok && r.converged;
    worst_inner = std::max(worst_inner, r.abs_error);
    evaluations += r.evaluations;
    return r.value;
  };
  Integral out = integrate_1d(outer, q.x_lo, q.x_hi, 0.5 * q.abs_tol, q.max_refinements);
  out.abs_error += width * worst_inner;
  out.evaluations = evaluations;
  out.converged = out.converged && inner_ok;
  return out;
}

double integrate_box_or_throw(const std::function<double(double, double)>& f,
                              const QuadratureConfig& q, const char* what) {
  const Integral r = integrate_box(f, q);
  if (!r.converged) {
    throw NumericError(std::string(what) + ": quadrature did not reach tolerance (error estimate " +
                           std::to_string(r.abs_error) + ")",
                       r.abs_error);
  }
  return r.value;
}

}  // namespace hrbm
