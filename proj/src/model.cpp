#include "satflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

namespace satflow {

Mobility::Mobility(double alpha, ScalarFn up, ScalarFn down, std::optional<double> lipschitz, std::string kind)
    : alpha_(alpha), up_(std::move(up)), down_(std::move(down)), lipschitz_(lipschitz), kind_(std::move(kind)) {
  if (!(alpha_ > 0.0)) throw ModelError("saturation level alpha must be positive");
  if (!up_ || !down_) throw ModelError("mobility factors must be set");
}

Mobility Mobility::linear() {
  return Mobility(
      kNoSaturation, [](const Dual& s) { return s; }, [](const Dual&) { return Dual{1.0}; }, 1.0, "linear");
}

Mobility Mobility::saturation(double alpha) {
  const double half = 0.5 * alpha;
  const double scale = 4.0 / (alpha * alpha);
  auto up = [half, alpha, scale](const Dual& s) { return s.val <= half ? scale * s * (alpha - s) : Dual{1.0}; };
  auto down = [half, alpha](const Dual& s) { return s.val <= half ? Dual{half * half} : s * (alpha - s); };
  return Mobility(alpha, up, down, alpha, "saturation");
}

namespace {

struct Table {
  double step = 0.0;
  std::vector<double> values;

  Dual operator()(const Dual& s) const {
    const auto last = static_cast<long>(values.size()) - 2;
    if (s.val <= 0.0) return {values.front(), 0.0};
    if (s.val >= (last + 1) * step) return {values.back(), 0.0};
    const long j = std::clamp(static_cast<long>(std::floor(s.val / step)), 0L, last);
    const double slope = (values[j + 1] - values[j]) / step;
    return {values[j] + slope * (s.val - j * step), slope * s.der};
  }
};

}  // namespace

Mobility decompose_mobility(const RealFn& m, const RealFn& dm, double alpha, double quadrature_step) {
  if (!(quadrature_step > 0.0)) throw ModelError("quadrature step must be positive");
  if (!(alpha > 0.0)) throw ModelError("saturation level alpha must be positive");

  if (!std::isfinite(alpha)) {
    for (int k = 1; k <= 1000; ++k) {
      const double s = k * quadrature_step;
      if (dm(s) < 0.0) {
        std::ostringstream msg;
        msg << "mobility without saturation must be non-decreasing; m'(" << s << ") = " << dm(s);
        throw ModelError(msg.str());
      }
    }
    auto up = [m, dm](const Dual& s) { return Dual{m(s.val), dm(s.val) * s.der}; };
    return Mobility(kNoSaturation, up, [](const Dual&) { return Dual{1.0}; }, std::nullopt, "custom");
  }

  const int n = 2 * std::max(1, static_cast<int>(std::ceil(alpha / (2.0 * quadrature_step))));
  const double step = alpha / n;
  const int mid = n / 2;

  std::vector<double> log_m(n + 1, 0.0);
  for (int j = 1; j < n; ++j) {
    const double s = j * step;
    const double value = m(s);
    if (!(value > 0.0) || !std::isfinite(value)) {
      std::ostringstream msg;
      msg << "mobility quotient m'/m is not integrable at quadrature step " << step << ": m(" << s << ") = " << value;
      throw ModelError(msg.str());
    }
    log_m[j] = std::log(value);
  }
  if (n > 2 && (dm(step) < 0.0 || dm(alpha - step) > 0.0)) {
    std::ostringstream msg;
    msg << "mobility derivative must be non-negative near 0 and non-positive near alpha; m'(" << step
        << ") = " << dm(step) << ", m'(" << alpha - step << ") = " << dm(alpha - step);
    throw ModelError(msg.str());
  }

  std::vector<double> log_up(n + 1, 0.0), log_down(n + 1, 0.0);
  log_down[mid] = log_m[mid];
  for (int j = mid; j + 1 < n; ++j) {
    const double inc = log_m[j + 1] - log_m[j];
    log_up[j + 1] = log_up[j] + pos_part(inc);
    log_down[j + 1] = log_down[j] + neg_part(inc);
  }
  for (int j = mid; j - 1 > 0; --j) {
    const double inc = log_m[j] - log_m[j - 1];
    log_up[j - 1] = log_up[j] - pos_part(inc);
    log_down[j - 1] = log_down[j] - neg_part(inc);
  }

  Table up{step, std::vector<double>(n + 1)};
  Table down{step, std::vector<double>(n + 1)};
  for (int j = 1; j < n; ++j) {
    up.values[j] = std::exp(log_up[j]);
    down.values[j] = std::exp(log_down[j]);
  }
  up.values[0] = 0.0;
  up.values[n] = up.values[n - 1];
  down.values[0] = down.values[1];
  down.values[n] = 0.0;

  return Mobility(alpha, up, down, std::nullopt, "custom");
}

Entropy Entropy::zero() {
  Entropy e;
  e.name = "zero";
  e.U = [](const Dual&) { return Dual{0.0}; };
  e.dU = [](const Dual&) { return Dual{0.0}; };
  e.ddU = [](double) { return 0.0; };
  e.is_zero = true;
  return e;
}

Entropy Entropy::quadratic(double coefficient) {
  if (!(coefficient > 0.0)) throw ModelError("quadratic entropy coefficient must be positive");
  Entropy e;
  e.name = "quadratic";
  e.parameter = coefficient;
  e.U = [coefficient](const Dual& s) { return coefficient * s * s; };
  e.dU = [coefficient](const Dual& s) { return 2.0 * coefficient * s; };
  e.ddU = [coefficient](double) { return 2.0 * coefficient; };
  return e;
}

Entropy Entropy::power(double m) {
  if (!(m > 0.0) || m == 1.0) throw ModelError("power entropy exponent must be positive and different from 1");
  Entropy e;
  e.name = "power";
  e.parameter = m;
  if (m == 2.0) {
    e.U = [](const Dual& s) { return s * s; };
    e.dU = [](const Dual& s) { return 2.0 * s; };
    e.ddU = [](double) { return 2.0; };
    return e;
  }
  const double c = 1.0 / (m - 1.0);
  e.singular_at_zero = m < 1.0;
  // For m > 1 the entropy is extended by 0 to negative densities, which keeps it convex.
  e.U = [m, c](const Dual& s) { return s.val > 0.0 ? c * pow(s, m) : Dual{m > 1.0 ? 0.0 : std::numeric_limits<double>::infinity()}; };
  e.dU = [m, c](const Dual& s) {
    if (s.val > 0.0) return m * c * pow(s, m - 1.0);
    if (m > 1.0) return Dual{0.0};
    throw DualDomainError("entropy derivative is singular at 0");
  };
  e.ddU = [m](double s) { return m * std::pow(s, m - 2.0); };
  return e;
}

Entropy Entropy::boltzmann() {
  Entropy e;
  e.name = "boltzmann";
  e.singular_at_zero = true;
  e.U = [](const Dual& s) { return s.val > 0.0 ? s * log(s) : Dual{0.0}; };
  e.dU = [](const Dual& s) {
    if (!(s.val > 0.0)) throw DualDomainError("entropy derivative is singular at 0");
    return log(s) + 1.0;
  };
  e.ddU = [](double s) { return 1.0 / s; };
  return e;
}

Potentials Potentials::zero() {
  Potentials p;
  p.hessian_bound_v = 0.0;
  p.vanishing_boundary_gradient = true;
  return p;
}

Potentials Potentials::quadratic(double a) {
  Potentials p;
  p.v_name = "quadratic";
  p.V = [a](const Point& x) { return a * x.squaredNorm(); };
  p.hessian_bound_v = 2.0 * std::abs(a);
  return p;
}

Potentials Potentials::linear(double c) {
  Potentials p;
  p.v_name = "linear";
  p.V = [c](const Point& x) { return c * x[0]; };
  p.hessian_bound_v = 0.0;
  return p;
}

Potentials Potentials::bump(double amplitude, double radius) {
  if (!(radius > 0.0)) throw ModelError("bump radius must be positive");
  Potentials p;
  p.v_name = "bump";
  p.V = [amplitude, radius](const Point& x) {
    double v = amplitude;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double t = 1.0 - x[k] * x[k] / (radius * radius);
      v *= t * t;
    }
    return v;
  };
  // |d^2/dx_k^2 (1 - x^2/R^2)^2| <= 8 / R^2 on [-R, R]; the other factors are bounded by 1.
  p.hessian_bound_v = 8.0 * std::abs(amplitude) / (radius * radius);
  p.vanishing_boundary_gradient = true;
  return p;
}

Potentials Potentials::with_gaussian_kernel(double amplitude, double width) const {
  if (!(width > 0.0)) throw ModelError("kernel width must be positive");
  Potentials p = *this;
  p.k_name = "gaussian";
  const double inv = 1.0 / (2.0 * width * width);
  p.K = [amplitude, inv](const Point& x, const Point& y) { return amplitude * std::exp(-(x - y).squaredNorm() * inv); };
  p.hessian_bound_k = std::abs(amplitude) / (width * width);
  p.vanishing_boundary_gradient = false;
  return p;
}

Potentials Potentials::with_quadratic_kernel(double amplitude) const {
  Potentials p = *this;
  p.k_name = "quadratic";
  p.K = [amplitude](const Point& x, const Point& y) { return amplitude * (x - y).squaredNorm(); };
  p.hessian_bound_k = 2.0 * std::abs(amplitude);
  p.vanishing_boundary_gradient = false;
  return p;
}

Discretization sample_potentials(const Potentials& pot, CellIndexSet cells) {
  const int n = cells.size();
  Eigen::VectorXd V = Eigen::VectorXd::Zero(n);
  std::vector<Point> centers;
  centers.reserve(n);
  for (int i = 0; i < n; ++i) centers.push_back(cells.center(i));
  if (pot.V) {
    for (int i = 0; i < n; ++i) V[i] = pot.V(centers[i]);
  }
  Eigen::MatrixXd K;
  if (pot.K) {
    K.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) K(i, j) = pot.K(centers[i], centers[j]);
    }
    const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + K.cwiseAbs().maxCoeff())) {
      std::ostringstream msg;
      msg << "interaction kernel is not symmetric on the grid: max |K_ij - K_ji| = " << asym;
      throw ModelError(msg.str());
    }
    K = 0.5 * (K + K.transpose()).eval();
  }
  if (!V.allFinite() || (K.size() > 0 && !K.allFinite())) throw ModelError("potentials are not finite on the grid");
  return {std::move(cells), std::move(V), std::move(K)};
}

namespace {

double xlogx(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

RealFn linear_mobility_lambda(double m, double scale, double anchor) {
  if (m == 2.0) {
    return [scale, anchor](double s) {
      s = std::max(s, 0.0);
      return scale * 2.0 * (xlogx(s) - s * std::log(anchor) - s + anchor);
    };
  }
  return [m, scale, anchor](double s) {
    if (s <= 0.0) {
      if (m < 1.0) return std::numeric_limits<double>::infinity();
      s = 0.0;
    }
    return scale * m / (m - 2.0) *
           ((std::pow(s, m - 1.0) - std::pow(anchor, m - 1.0)) / (m - 1.0) - std::pow(anchor, m - 2.0) * (s - anchor));
  };
}

}  // namespace

Model make_model(std::string name, Mobility mobility, Entropy entropy, Potentials potentials) {
  RealFn lambda;
  const double anchor = mobility.saturating() ? 0.5 * mobility.alpha() : 1.0;
  const bool quadratic_like = entropy.name == "quadratic" || (entropy.name == "power" && entropy.parameter == 2.0);
  const double c = entropy.name == "quadratic" ? entropy.parameter : 1.0;
  if (entropy.is_zero) {
    lambda = [](double) { return 0.0; };
  } else if (mobility.kind() == "linear" && entropy.name == "power") {
    lambda = linear_mobility_lambda(entropy.parameter, 1.0, anchor);
  } else if (mobility.kind() == "linear" && quadratic_like) {
    lambda = linear_mobility_lambda(2.0, c, anchor);
  } else if (mobility.kind() == "saturation" && quadratic_like) {
    // Lambda'' = 2c / (s (alpha - s)).
    const double alpha = mobility.alpha();
    lambda = [c, alpha](double s) {
      s = std::clamp(s, 0.0, alpha);
      return 2.0 * c / alpha * (xlogx(s) + xlogx(alpha - s) - alpha * std::log(0.5 * alpha));
    };
  }
  return Model{std::move(name), std::move(mobility), std::move(entropy), std::move(potentials), std::move(lambda)};
}

namespace presets {

Model porous_medium(double m) {
  return make_model("porous-medium", Mobility::linear(), Entropy::power(m), Potentials::zero());
}

Model saturation_drift_diffusion(double confinement) {
  return make_model("saturation-drift-diffusion", Mobility::saturation(1.0), Entropy::quadratic(1.0),
                    Potentials::quadratic(confinement));
}

Model aggregation(double confinement, double kernel_amplitude) {
  return make_model("aggregation", Mobility::saturation(1.0), Entropy::quadratic(1.0),
                    Potentials::quadratic(confinement).with_gaussian_kernel(kernel_amplitude, 1.0));
}

}  // namespace presets

}  // namespace satflow
