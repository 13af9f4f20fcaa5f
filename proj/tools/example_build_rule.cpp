// Builds the m = 6 optimal rule on 16 intervals and applies it to e^x.

#include <iostream>

#include "optquad/optquad.hpp"

int main() {
  using namespace optquad;
  const int m = 6, N = 16;
  const QuadRule rule = build_rule(m, N);

  std::cout << "C[0] = " << rule.C.front() << "\n";
  std::cout << "A    = " << rule.A << "\n";
  std::cout << "B    = " << rule.B << "\n";
  std::cout << "||l||^2 = " << rule.norm_sq << "\n";

  const Integrand g = corpus_integrand("exp", m);
  const BigReal approx = apply(rule, g);
  std::cout << "int_0^1 e^x ~ " << approx << "\n";
  std::cout << "error = " << abs(approx - *g.exact_integral).format(6)
            << ", bound = " << error_bound(rule, *g.fm_l2).format(6) << "\n";
}
