#pragma once

#include <functional>
#include <vector>

namespace hrbm {

// Truncation box in (x, delta = x - y) coordinates plus tolerance settings.
struct QuadratureConfig {
  double x_lo = -8.0;
  double x_hi = 40.0;
  double delta_lo = -40.0;
  double delta_hi = 40.0;
  double abs_tol = 1e-9;
  int max_refinements = 2000;  // subinterval budget per one-dimensional pass

  // Throws InputError if the box is empty or the tolerance is not positive.
  void validate() const;
  // Box enlarged about its centre by the given relative factor.
  [[nodiscard]] QuadratureConfig enlarged(double factor) const;
};

struct Integral {
  double value = 0.0;
  double abs_error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

// Global adaptive Gauss-Kronrod (21 point) over [a, b], absolute tolerance only.
[[nodiscard]] Integral integrate_1d(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, int max_refinements);

// Integral over [a, inf). Breakpoints above a split off finite pieces so a
// peak far from a is not squeezed against t = 1 by the tail map
// z = c - log(1 - t), which is applied from the last breakpoint c.
[[nodiscard]] Integral integrate_semi_infinite(const std::function<double(double)>& f, double a,
                                               double abs_tol, int max_refinements,
                                               std::vector<double> breakpoints = {});

// Iterated integral of f(x, y) over the (x, delta) box, y = x - delta. The
// outer pass runs in x; the inner pass in delta gets an equal share of the
// tolerance. Inner failures mark the whole result as not converged.
[[nodiscard]] Integral integrate_box(const std::function<double(double, double)>& f,
                                     const QuadratureConfig& q);

// Like integrate_box but throws NumericError when the tolerance is not met.
[[nodiscard]] double integrate_box_or_throw(const std::function<double(double, double)>& f,
                                            const QuadratureConfig& q, const char* what);

}  // namespace hrbm
