#pragma once

#include "ecrfem/fields.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ecrfem {

using ScalarFunction = std::function<double(const Vec&)>;
using VectorFunction = std::function<Vec(const Vec&)>;

/// ||u_h - u||_{L2} with a cell rule of the given degree (>= 8 for analytic u).
double l2_error(const BrokenField& field, const ScalarFunction& exact, int degree = kLoadDegree,
                int component = 0);
/// ||grad_NC u_h - grad u||_{L2}.
double broken_h1_error(const BrokenField& field, const VectorFunction& exact_gradient,
                       int degree = kLoadDegree, int component = 0);
/// ||sigma_h - grad u||_{L2} for a vector RT field.
double rt_error(const RTField& sigma, const VectorFunction& exact_gradient, int degree = kLoadDegree);

double l2_norm(const BrokenField& field, int component = 0);
double broken_h1_norm(const BrokenField& field, int component = 0);
double rt_norm(const RTField& sigma, int row = 0);
/// ||sigma - grad_NC u|| (row `component` of each), exact for the affine
/// fields involved.
double rt_gradient_difference(const RTField& sigma, const BrokenField& field, int component = 0);

/// ||grad u - Pi_0 grad u||_{L2}.
double gradient_projection_error(const SimplexMesh& mesh, const VectorFunction& exact_gradient,
                                 int degree = kLoadDegree);

/// Data oscillation (sum_K h_K^2 ||f - Pi_r f||^2_K)^{1/2}. Only r = 0.
double oscillation(const SimplexMesh& mesh, const ScalarLoad& f, int r = 0, int degree = kLoadDegree);

/// Observed rates of errors on a uniformly refined hierarchy (h halves per
/// entry). Zero errors give +infinity pairwise and set `infinite`.
struct RateFit {
  std::vector<double> pairwise; ///< log2(e_l / e_{l+1})
  double slope = 0.0;           ///< least-squares slope of -log2 e against level
  bool infinite = false;
};

RateFit fit_rate(const std::vector<double>& errors);

/// Per-level table with named columns. Columns declared with a rate get an
/// extra "<name>_rate" CSV column holding log2(e_{l-1}/e_l).
class ConvergenceTable {
public:
  enum class Kind { Count, Value, Error };

  void declare(const std::string& column, Kind kind);
  void add_level(int level, double h);
  /// Sets `column` on the most recent level.
  void set(const std::string& column, double value);
  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  std::size_t size() const { return levels_.size(); }
  const std::vector<int>& levels() const { return levels_; }
  const std::vector<double>& h() const { return h_; }
  bool has_column(const std::string& column) const { return values_.count(column) != 0; }
  const std::vector<double>& column(const std::string& column) const;
  const std::vector<std::string>& column_names() const { return order_; }
  /// Pairwise rates of `column`; entry 0 is NaN.
  std::vector<double> rates(const std::string& column) const;

  /// '#' note lines, a header row, then one row per level. Floats are
  /// written with 17 significant digits.
  std::string to_csv() const;
  /// Two-column "h error" text for one column.
  std::string plot_data(const std::string& column) const;

private:
  std::vector<int> levels_;
  std::vector<double> h_;
  std::vector<std::string> order_;
  std::map<std::string, Kind> kinds_;
  std::map<std::string, std::vector<double>> values_;
  std::vector<std::string> notes_;
};

/// "%.17g" formatting shared by all text outputs.
std::string format_double(double value);

} // namespace ecrfem
