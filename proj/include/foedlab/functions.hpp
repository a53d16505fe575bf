#pragma once

#include <functional>
#include <string>
#include <vector>

namespace foedlab {

// A catalog test function: the payload for bridge/fdd/conditional queries.
// sup_bound is the declared bound on the working range [-50, 50] (linear is
// the only unbounded member; its bound is stated for that range and batteries
// stay well inside it). Jump locations let the quadrature engine place panel
// boundaries at discontinuities instead of hunting them adaptively.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  double sup_bound = 1.0;
  std::vector<double> jumps;

  double operator()(double v) const { return f(v); }
};

// A smooth function bundled with its first four derivatives, for generator
// identities that act on (f, f', f'') and iterated-generator checks that
// need up to f''''.
struct SmoothFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> d3;
  std::function<double(double)> d4;
};

TestFunction make_indicator(double c);  // 1 on (-inf, c], 0 beyond
TestFunction make_exp_neg_sq();         // e^{-v^2}
TestFunction make_linear();             // v
TestFunction make_constant();           // 1
TestFunction make_gaussian_bump(double center, double width);

SmoothFunction make_smooth_constant();
SmoothFunction make_smooth_exp_neg_sq();
SmoothFunction make_smooth_gaussian_bump(double center, double width);

// Parses catalog spellings: "constant", "linear", "exp_neg_sq",
// "indicator(c)", "gaussian_bump(center,width)". Unknown names or malformed
// arguments throw std::invalid_argument.
TestFunction parse_test_function(const std::string& text);

}  // namespace foedlab
