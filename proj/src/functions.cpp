#include "foedlab/functions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace foedlab {

TestFunction make_indicator(double c) {
  TestFunction tf;
  std::ostringstream name;
  name << "indicator(" << c << ")";
  tf.name = name.str();
  tf.f = [c](double v) { return v <= c ? 1.0 : 0.0; };
  tf.sup_bound = 1.0;
  tf.jumps = {c};
  return tf;
}

TestFunction make_exp_neg_sq() {
  TestFunction tf;
  tf.name = "exp_neg_sq";
  tf.f = [](double v) { return std::exp(-v * v); };
  tf.sup_bound = 1.0;
  return tf;
}

TestFunction make_linear() {
  TestFunction tf;
  tf.name = "linear";
  tf.f = [](double v) { return v; };
  tf.sup_bound = 50.0;
  return tf;
}

TestFunction make_constant() {
  TestFunction tf;
  tf.name = "constant";
  tf.f = [](double) { return 1.0; };
  tf.sup_bound = 1.0;
  return tf;
}

TestFunction make_gaussian_bump(double center, double width) {
  if (!(width > 0.0)) {
    throw std::invalid_argument("gaussian_bump: width must be > 0");
  }
  TestFunction tf;
  std::ostringstream name;
  name << "gaussian_bump(" << center << "," << width << ")";
  tf.name = name.str();
  tf.f = [center, width](double v) {
    const double u = (v - center) / width;
    return std::exp(-0.5 * u * u);
  };
  tf.sup_bound = 1.0;
  return tf;
}

SmoothFunction make_smooth_constant() {
  SmoothFunction sf;
  sf.name = "constant";
  sf.f = [](double) { return 1.0; };
  sf.d1 = [](double) { return 0.0; };
  sf.d2 = [](double) { return 0.0; };
  sf.d3 = [](double) { return 0.0; };
  sf.d4 = [](double) { return 0.0; };
  return sf;
}

SmoothFunction make_smooth_exp_neg_sq() {
  SmoothFunction sf;
  sf.name = "exp_neg_sq";
  sf.f = [](double v) { return std::exp(-v * v); };
  sf.d1 = [](double v) { return -2.0 * v * std::exp(-v * v); };
  sf.d2 = [](double v) { return (4.0 * v * v - 2.0) * std::exp(-v * v); };
  sf.d3 = [](double v) {
    return (-8.0 * v * v * v + 12.0 * v) * std::exp(-v * v);
  };
  sf.d4 = [](double v) {
    const double v2 = v * v;
    return (16.0 * v2 * v2 - 48.0 * v2 + 12.0) * std::exp(-v * v);
  };
  return sf;
}

SmoothFunction make_smooth_gaussian_bump(double center, double width) {
  if (!(width > 0.0)) {
    throw std::invalid_argument("gaussian_bump: width must be > 0");
  }
  SmoothFunction sf;
  std::ostringstream name;
  name << "gaussian_bump(" << center << "," << width << ")";
  sf.name = name.str();
  const double s2 = width * width;
  auto base = [center, s2](double v) {
    const double u = v - center;
    return std::exp(-0.5 * u * u / s2);
  };
  sf.f = base;
  sf.d1 = [center, s2, base](double v) {
    return -(v - center) / s2 * base(v);
  };
  sf.d2 = [center, s2, base](double v) {
    const double u = v - center;
    return (u * u / s2 - 1.0) / s2 * base(v);
  };
  sf.d3 = [center, s2, base](double v) {
    const double u = v - center;
    return -(u * u * u / s2 - 3.0 * u) / (s2 * s2) * base(v);
  };
  sf.d4 = [center, s2, base](double v) {
    const double u = v - center;
    const double u2 = u * u;
    return (u2 * u2 / s2 - 6.0 * u2 + 3.0 * s2) / (s2 * s2 * s2) * base(v);
  };
  return sf;
}

namespace {

std::vector<double> parse_args(const std::string& text, std::size_t open,
                               const std::string& name) {
  if (text.back() != ')') {
    throw std::invalid_argument("test function '" + text +
                                "': missing closing parenthesis");
  }
  std::vector<double> args;
  std::string body = text.substr(open + 1, text.size() - open - 2);
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size() || item.empty()) {
      throw std::invalid_argument("test function '" + name +
                                  "': bad numeric argument '" + item + "'");
    }
    args.push_back(value);
  }
  return args;
}

}  // namespace

TestFunction parse_test_function(const std::string& text) {
  const std::size_t open = text.find('(');
  const std::string name = text.substr(0, open);
  std::vector<double> args;
  if (open != std::string::npos) args = parse_args(text, open, name);

  auto expect = [&](std::size_t n) {
    if (args.size() != n) {
      std::ostringstream msg;
      msg << "test function '" << name << "' expects " << n
          << " argument(s), got " << args.size();
      throw std::invalid_argument(msg.str());
    }
  };

  if (name == "constant") {
    expect(0);
    return make_constant();
  }
  if (name == "linear") {
    expect(0);
    return make_linear();
  }
  if (name == "exp_neg_sq") {
    expect(0);
    return make_exp_neg_sq();
  }
  if (name == "indicator") {
    expect(1);
    return make_indicator(args[0]);
  }
  if (name == "gaussian_bump") {
    expect(2);
    return make_gaussian_bump(args[0], args[1]);
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

}  // namespace foedlab
