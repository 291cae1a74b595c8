#include "ecrfem/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ecrfem {

namespace {

template <class Integrand>
double integrate(const SimplexMesh& mesh, int degree, Integrand&& integrand) {
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& [x, w] : cell_points(mesh.cell_geometry(c), degree)) total += w * integrand(c, x);
  return total;
}

double safe_sqrt(double v) { return std::sqrt(std::max(0.0, v)); }

} // namespace

double l2_error(const BrokenField& field, const ScalarFunction& exact, int degree, int component) {
  return safe_sqrt(integrate(field.mesh(), degree, [&](std::size_t c, const Vec& x) {
    const double d = field.value(c, x, component) - exact(x);
    return d * d;
  }));
}

double broken_h1_error(const BrokenField& field, const VectorFunction& exact_gradient, int degree,
                       int component) {
  return safe_sqrt(integrate(field.mesh(), degree, [&](std::size_t c, const Vec& x) {
    return (field.gradient(c, x, component) - exact_gradient(x)).squaredNorm();
  }));
}

double rt_error(const RTField& sigma, const VectorFunction& exact_gradient, int degree) {
  return safe_sqrt(integrate(sigma.mesh(), degree, [&](std::size_t c, const Vec& x) {
    return (sigma.value(c, x) - exact_gradient(x)).squaredNorm();
  }));
}

double l2_norm(const BrokenField& field, int component) {
  return safe_sqrt(integrate(field.mesh(), kMatrixDegree, [&](std::size_t c, const Vec& x) {
    const double v = field.value(c, x, component);
    return v * v;
  }));
}

double broken_h1_norm(const BrokenField& field, int component) {
  return safe_sqrt(integrate(field.mesh(), kMatrixDegree, [&](std::size_t c, const Vec& x) {
    return field.gradient(c, x, component).squaredNorm();
  }));
}

double rt_norm(const RTField& sigma, int row) {
  return safe_sqrt(integrate(sigma.mesh(), kMatrixDegree,
                             [&](std::size_t c, const Vec& x) { return sigma.value(c, x, row).squaredNorm(); }));
}

double rt_gradient_difference(const RTField& sigma, const BrokenField& field, int component) {
  return safe_sqrt(integrate(field.mesh(), kMatrixDegree, [&](std::size_t c, const Vec& x) {
    return (sigma.value(c, x, component) - field.gradient(c, x, component)).squaredNorm();
  }));
}

double gradient_projection_error(const SimplexMesh& mesh, const VectorFunction& exact_gradient, int degree) {
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    const auto pts = cell_points(g, degree);
    Vec mean = Vec::Zero(g.dim);
    for (const auto& [x, w] : pts) mean += w * exact_gradient(x);
    mean /= g.measure;
    for (const auto& [x, w] : pts) total += w * (exact_gradient(x) - mean).squaredNorm();
  }
  return safe_sqrt(total);
}

double oscillation(const SimplexMesh& mesh, const ScalarLoad& f, int r, int degree) {
  if (r != 0) throw InputError("oscillation: only r = 0 is implemented");
  if (f.is_piecewise_constant()) return 0.0;
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    const auto pts = cell_points(g, degree);
    double mean = 0.0;
    for (const auto& [x, w] : pts) mean += w * f(c, x);
    mean /= g.measure;
    double local = 0.0;
    for (const auto& [x, w] : pts) local += w * (f(c, x) - mean) * (f(c, x) - mean);
    total += g.diameter * g.diameter * local;
  }
  return safe_sqrt(total);
}

RateFit fit_rate(const std::vector<double>& errors) {
  if (errors.size() < 2) throw InputError("fit_rate: need at least two levels");
  RateFit fit;
  for (double e : errors) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw InputError("fit_rate: errors must be finite and non-negative");
    if (e == 0.0) fit.infinite = true;
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    fit.pairwise.push_back(errors[i + 1] == 0.0 ? std::numeric_limits<double>::infinity()
                                                 : std::log2(errors[i] / errors[i + 1]));
  if (fit.infinite) {
    fit.slope = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double m = static_cast<double>(errors.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double x = static_cast<double>(i), y = -std::log2(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return fit;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void ConvergenceTable::declare(const std::string& column, Kind kind) {
  if (kinds_.count(column)) return;
  order_.push_back(column);
  kinds_[column] = kind;
  values_[column].assign(levels_.size(), std::numeric_limits<double>::quiet_NaN());
}

void ConvergenceTable::add_level(int level, double h) {
  levels_.push_back(level);
  h_.push_back(h);
  for (auto& [name, v] : values_) v.push_back(std::numeric_limits<double>::quiet_NaN());
}

void ConvergenceTable::set(const std::string& column, double value) {
  if (levels_.empty()) throw InputError("ConvergenceTable: add a level first");
  if (!kinds_.count(column)) declare(column, Kind::Value);
  values_[column].back() = value;
}

const std::vector<double>& ConvergenceTable::column(const std::string& column) const {
  auto it = values_.find(column);
  if (it == values_.end()) throw InputError("ConvergenceTable: unknown column '" + column + "'");
  return it->second;
}

std::vector<double> ConvergenceTable::rates(const std::string& name) const {
  const auto& v = column(name);
  std::vector<double> r(v.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] == 0.0)
      r[i] = std::numeric_limits<double>::infinity();
    else
      r[i] = std::log2(v[i - 1] / v[i]);
  }
  return r;
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream os;
  for (const auto& n : notes_) os << "# " << n << '\n';
  os << "level,h";
  for (const auto& name : order_) {
    os << ',' << name;
    if (kinds_.at(name) == Kind::Error) os << ',' << name << "_rate";
  }
  os << '\n';
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    os << levels_[i] << ',' << format_double(h_[i]);
    for (const auto& name : order_) {
      const double v = values_.at(name)[i];
      const Kind kind = kinds_.at(name);
      os << ',';
      if (kind == Kind::Count && std::isfinite(v))
        os << static_cast<long long>(v);
      else
        os << format_double(v);
      if (kind == Kind::Error) {
        os << ',';
        if (i > 0) os << format_double(rates(name)[i]);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string ConvergenceTable::plot_data(const std::string& name) const {
  const auto& v = column(name);
  std::ostringstream os;
  os << "# h " << name << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) os << format_double(h_[i]) << ' ' << format_double(v[i]) << '\n';
  return os.str();
}

} // namespace ecrfem
