#pragma once

// Volume of a U(n)-invariant potential Phi(s), s = |z|^2, by a 1-D integral
//   vol = 4^n pi^n / (n-1)! * int_0^inf s^{n-1} Phi'(s)^{n-1} (s Phi')'(s) ds,
// evaluated with GSL's adaptive semi-infinite rule. Shares nothing with the
// multi-chart atlas it checks.

#include <cmath>
#include <numbers>

#include <gsl/gsl_integration.h>

namespace kfut::oracle {

struct RadialPotential {
  double (*d1)(double);  // Phi'
  double (*ds)(double);  // (s Phi')' in closed form, avoiding cancellation at large s
  int n;
};

inline double radial_volume(const RadialPotential& p) {
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(1000);
  gsl_function F;
  F.function = [](double s, void* ctx) {
    const auto* rp = static_cast<const RadialPotential*>(ctx);
    return std::pow(s, rp->n - 1) * std::pow(rp->d1(s), rp->n - 1) * rp->ds(s);
  };
  F.params = const_cast<RadialPotential*>(&p);
  double result = 0.0, abserr = 0.0;
  gsl_integration_qagiu(&F, 0.0, 0.0, 1e-13, 1000, ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  double fact = 1.0;
  for (int k = 2; k < p.n; ++k) fact *= k;
  return std::pow(4.0 * std::numbers::pi, p.n) / fact * result;
}

}  // namespace kfut::oracle
