#include "ecrfem/ecrfem.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace ecrfem;

namespace {

struct RunConfig {
  std::string command;
  int dim = 2;
  std::string coarse = "diagonal";
  int subdivisions = 1;
  std::string mesh_file;
  int levels = 3;
  std::string rhs = "const:1";
  std::string solution = "sine";
  std::string elements;
  std::string problem = "poisson";
  int k = 1;
  bool condensed = false;
  double tol = 1e-9;
  double jump_tol = 1e-10;
  double solver_tol = 1e-12;
  double eigen_tol = 1e-10;
  std::string out = ".";
  bool emit_plot = false;
  unsigned seed = 20241018u;
  std::string command_line;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.tolerance = cfg.solver_tol;
  s.eigen_tolerance = cfg.eigen_tol;
  s.num_eigenpairs = cfg.k;
  return s;
}

std::vector<SimplexMesh> hierarchy(const RunConfig& cfg) {
  SimplexMesh coarse = cfg.mesh_file.empty()
                           ? build_box_mesh(cfg.dim, cfg.subdivisions, parse_box_variant(cfg.coarse))
                           : read_mesh_file(cfg.mesh_file);
  return refine_hierarchy(coarse, cfg.levels);
}

bool unit_box(const RunConfig& cfg) { return cfg.mesh_file.empty(); }

/// Loads resolved per level. Tables and random data are per coarse cell and
/// inherited by descendants.
class LoadSource {
public:
  LoadSource(const RunConfig& cfg, std::size_t coarse_cells) : cfg_(cfg), coarse_cells_(coarse_cells) {
    const auto colon = cfg.rhs.find(':');
    kind_ = cfg.rhs.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : cfg.rhs.substr(colon + 1);
    if (kind_ == "const") {
      for (const auto& v : split(arg, ',')) constants_.push_back(std::stod(v));
      if (constants_.empty()) throw ConfigError("--rhs const:<c>[,<c>...] needs a value");
    } else if (kind_ == "table") {
      std::ifstream in(arg);
      if (!in) throw ConfigError("cannot open load table '" + arg + "'");
      for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> row;
        for (double v; ls >> v;) row.push_back(v);
        table_.push_back(row);
      }
      if (table_.size() != coarse_cells_)
        throw ConfigError("load table has " + std::to_string(table_.size()) + " rows, coarse mesh has " +
                          std::to_string(coarse_cells_) + " cells");
    } else if (kind_ == "random") {
      std::mt19937 rng(cfg.seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      table_.assign(coarse_cells_, std::vector<double>(cfg.dim));
      for (auto& row : table_)
        for (auto& v : row) v = dist(rng);
    } else if (kind_ != "sine") {
      throw ConfigError("--rhs must be const:<c>, sine, table:<file> or random");
    }
  }

  bool piecewise_constant() const { return kind_ != "sine"; }

  ScalarLoad scalar(const SimplexMesh& mesh, int level, int component, bool project) const {
    if (kind_ == "const")
      return ScalarLoad::constant(component < static_cast<int>(constants_.size()) ? constants_[component] : 0.0);
    if (kind_ == "sine") {
      if (component > 0) return ScalarLoad::constant(0.0);
      const auto f = sine_solution(mesh.dim()).f;
      if (!project) return ScalarLoad::function(f);
      if (!warned_) {
        std::cerr << "warning: projecting the load onto piecewise constants for the equivalence check\n";
        warned_ = true;
      }
      const auto p = project_p0(mesh, f);
      const auto& c = p.coefficients();
      return ScalarLoad::piecewise_constant(std::vector<double>(c.data(), c.data() + c.size()));
    }
    const std::size_t per = std::size_t{1} << (mesh.dim() * level);
    std::vector<double> v(mesh.num_cells());
    for (std::size_t c = 0; c < v.size(); ++c) {
      const auto& row = table_[c / per];
      v[c] = component < static_cast<int>(row.size()) ? row[component] : 0.0;
    }
    return ScalarLoad::piecewise_constant(std::move(v));
  }

  VectorLoad vector(const SimplexMesh& mesh, int level, bool project) const {
    VectorLoad f;
    for (int r = 0; r < mesh.dim(); ++r) f.push_back(scalar(mesh, level, r, project));
    return f;
  }

private:
  const RunConfig& cfg_;
  std::size_t coarse_cells_;
  std::string kind_;
  std::vector<double> constants_;
  std::vector<std::vector<double>> table_;
  mutable bool warned_ = false;
};

std::vector<std::string> elements(const RunConfig& cfg, const std::string& fallback,
                                  const std::set<std::string>& allowed) {
  auto list = split(cfg.elements.empty() ? fallback : cfg.elements, ',');
  for (const auto& e : list)
    if (!allowed.count(e)) throw ConfigError("element '" + e + "' is not available for " + cfg.command);
  return list;
}

void describe(ConvergenceTable& t, const RunConfig& cfg) {
  t.add_note("ecrfem " + cfg.command_line);
  t.add_note("tol=" + format_double(cfg.tol) + " jump_tol=" + format_double(cfg.jump_tol) +
             " solver_tol=" + format_double(cfg.solver_tol) + " eigen_tol=" + format_double(cfg.eigen_tol) +
             " quadrature_degree=" + std::to_string(kLoadDegree) + " seed=" + std::to_string(cfg.seed));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void emit(const RunConfig& cfg, const ConvergenceTable& table) {
  fs::create_directories(cfg.out);
  write_file(fs::path(cfg.out) / (cfg.command + ".csv"), table.to_csv());
  if (!cfg.emit_plot) return;
  for (const auto& name : table.column_names())
    if (name.find("error") != std::string::npos || name.find("difference") != std::string::npos)
      write_file(fs::path(cfg.out) / (cfg.command + "_" + name + ".dat"), table.plot_data(name));
}

int cmd_poisson(const RunConfig& cfg) {
  const auto meshes = hierarchy(cfg);
  const LoadSource loads(cfg, meshes.front().num_cells());
  const auto els = elements(cfg, "ecr,cr", {"ecr", "cr", "rt"});
  const bool exact = cfg.rhs == "sine" && unit_box(cfg);
  const auto sol = sine_solution(cfg.dim);
  const auto solver = solver_config(cfg);
  ConvergenceTable t;
  describe(t, cfg);
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const auto& m = meshes[l];
    const auto f = loads.scalar(m, static_cast<int>(l), 0, false);
    t.add_level(static_cast<int>(l), m.h());
    t.set("osc", oscillation(m, f));
    for (const auto& e : els) {
      if (e == "rt") {
        const auto rt = solve_poisson_mixed(m, f, solver);
        t.declare("dofs_rt", ConvergenceTable::Kind::Count);
        t.set("dofs_rt", static_cast<double>(m.num_facets() + m.num_cells()));
        if (exact) {
          t.declare("h1_error_rt", ConvergenceTable::Kind::Error);
          t.declare("l2_error_rt", ConvergenceTable::Kind::Error);
          t.set("h1_error_rt", rt_error(rt.sigma, sol.gradient));
          t.set("l2_error_rt", l2_error(rt.u, sol.u));
        }
        continue;
      }
      const Family fam = parse_family(e);
      const BrokenField u = (fam == Family::ECR && cfg.condensed) ? solve_ecr_condensed(m, f, solver).ecr
                                                                   : solve_poisson(m, f, fam, solver);
      t.declare("dofs_" + e, ConvergenceTable::Kind::Count);
      t.set("dofs_" + e, u.dofs().size());
      if (exact) {
        t.declare("h1_error_" + e, ConvergenceTable::Kind::Error);
        t.declare("l2_error_" + e, ConvergenceTable::Kind::Error);
        t.set("h1_error_" + e, broken_h1_error(u, sol.gradient));
        t.set("l2_error_" + e, l2_error(u, sol.u));
      }
    }
    std::cout << "level " << l << ": h = " << format_double(m.h()) << ", cells = " << m.num_cells() << "\n";
  }
  emit(cfg, t);
  return 0;
}

int cmd_stokes(const RunConfig& cfg) {
  const auto meshes = hierarchy(cfg);
  const LoadSource loads(cfg, meshes.front().num_cells());
  const auto els = elements(cfg, "ecr", {"ecr", "cr", "rt"});
  const auto solver = solver_config(cfg);
  ConvergenceTable t;
  describe(t, cfg);
  bool ok = true;
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const auto& m = meshes[l];
    const auto f = loads.vector(m, static_cast<int>(l), false);
    t.add_level(static_cast<int>(l), m.h());
    for (const auto& e : els) {
      double res = 0.0, scale = 0.0;
      if (e == "rt") {
        const auto rt = solve_stokes_mixed(m, f, solver);
        for (std::size_t c = 0; c < m.num_cells(); ++c)
          for (int r = 0; r < m.dim(); ++r) {
            const auto& g = m.cell_geometry(c);
            double fk = 0.0;
            for (const auto& [x, w] : cell_points(g, kLoadDegree)) fk += w * f[r](c, x);
            fk /= g.measure;
            res = std::max(res, std::abs(rt.sigma.divergence(c, r) + fk));
            scale = std::max(scale, std::abs(fk));
          }
        t.declare("dofs_rt", ConvergenceTable::Kind::Count);
        t.set("dofs_rt", static_cast<double>(m.dim() * (m.num_facets() + m.num_cells())));
      } else {
        const auto s = solve_stokes(m, f, parse_family(e), solver);
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
          const Vec& x = m.cell_geometry(c).centroid;
          res = std::max(res, std::abs(s.velocity.divergence(c, x)));
          scale = std::max(scale, s.velocity.gradient_tensor(c, x).norm());
        }
        t.declare("dofs_" + e, ConvergenceTable::Kind::Count);
        t.set("dofs_" + e, s.velocity.dofs().size() + s.pressure.dofs().size());
      }
      const double rel = scale > 0.0 ? res / scale : res;
      t.set("divergence_residual_" + e, rel);
      if (!(rel <= cfg.tol)) {
        ok = false;
        std::cerr << "level " << l << " " << e << ": divergence residual " << format_double(rel) << "\n";
      }
    }
  }
  emit(cfg, t);
  return ok ? 0 : 1;
}

int cmd_eigen(const RunConfig& cfg) {
  const auto meshes = hierarchy(cfg);
  const auto els = elements(cfg, "ecr,cr", {"ecr", "cr", "rt", "rt-mixed", "rt-equiv"});
  const auto solver = solver_config(cfg);
  ConvergenceTable t;
  describe(t, cfg);
  std::vector<double> exact;
  if (unit_box(cfg)) exact = box_dirichlet_eigenvalues(cfg.dim, cfg.k);
  bool ok = true;
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const auto& m = meshes[l];
    t.add_level(static_cast<int>(l), m.h());
    std::map<std::string, std::vector<double>> values;
    for (const auto& e : els) {
      const auto form = parse_eigen_formulation(e);
      const auto modes = solve_eigen(m, form, cfg.k, solver);
      const std::string name = to_string(form);
      for (int i = 0; i < cfg.k; ++i) {
        const std::string col = "lambda" + std::to_string(i + 1) + "_" + name;
        t.set(col, modes[i].value);
        values[name].push_back(modes[i].value);
        std::cout << "level " << l << " " << col << " = " << format_double(modes[i].value) << "\n";
      }
    }
    for (std::size_t i = 0; i < exact.size(); ++i) t.set("lambda" + std::to_string(i + 1) + "_exact", exact[i]);
    if (values.count("ecr") && values.count("cr"))
      for (int i = 0; i < cfg.k; ++i)
        if (values["ecr"][i] > values["cr"][i] * (1.0 + 1e-12)) {
          ok = false;
          std::cerr << "level " << l << ": lambda_" << i + 1 << " ecr exceeds cr\n";
        }
  }
  if (!exact.empty()) std::cout << "exact lambda_1 = " << format_double(exact[0]) << "\n";
  emit(cfg, t);
  return ok ? 0 : 1;
}

int cmd_equiv(const RunConfig& cfg) {
  const auto meshes = hierarchy(cfg);
  const LoadSource loads(cfg, meshes.front().num_cells());
  std::vector<std::string> problems = split(cfg.problem, ',');
  if (cfg.problem == "all") problems = {"poisson", "stokes", "marini", "cgs", "eigen"};
  for (const auto& p : problems)
    if (p != "poisson" && p != "stokes" && p != "marini" && p != "cgs" && p != "eigen")
      throw ConfigError("unknown --problem '" + p + "'");
  if (std::count(problems.begin(), problems.end(), "cgs") && cfg.dim != 2 && cfg.mesh_file.empty())
    throw ConfigError("the cgs identity needs --dim 2");

  ConvergenceTable t;
  describe(t, cfg);
  std::string json = "[\n";
  bool ok = true, first = true;
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const auto& m = meshes[l];
    IdentityOptions opt;
    opt.tolerance = cfg.tol;
    opt.pointwise_tolerance = cfg.tol;
    opt.jump_tolerance = cfg.jump_tol;
    opt.level = static_cast<int>(l);
    opt.solver = solver_config(cfg);
    t.add_level(static_cast<int>(l), m.h());
    for (const auto& p : problems) {
      IdentityReport rep;
      const int lev = static_cast<int>(l);
      if (p == "poisson") rep = check_poisson_identity(m, loads.scalar(m, lev, 0, true), opt);
      if (p == "stokes") rep = check_stokes_identity(m, loads.vector(m, lev, true), opt);
      if (p == "marini") rep = check_marini_identity(m, loads.scalar(m, lev, 0, true), opt);
      if (p == "cgs") rep = check_cgs_identity(m, loads.vector(m, lev, true), opt);
      if (p == "eigen") rep = check_eigen_equivalence(m, cfg.k, opt);
      double worst = 0.0;
      for (const auto& r : rep.residuals) worst = std::max(worst, r.relative);
      t.set(p + "_max_relative_residual", worst);
      t.set(p + "_max_normal_jump", rep.max_normal_jump);
      json += (first ? "  " : ",\n  ") + rep.to_json();
      first = false;
      std::cout << "level " << l << " " << rep.identity << ": " << (rep.passed ? "pass" : "FAIL")
                << " (max relative residual " << format_double(worst) << ")\n";
      if (!rep.passed) {
        ok = false;
        for (const auto& r : rep.residuals)
          if (!r.passed)
            std::cerr << "  " << r.name << ": relative " << format_double(r.relative) << " > "
                      << format_double(r.tolerance) << "\n";
      }
    }
  }
  json += "\n]\n";
  emit(cfg, t);
  write_file(fs::path(cfg.out) / "equiv.json", json);
  return ok ? 0 : 1;
}

int cmd_convergence(const RunConfig& cfg) {
  if (!unit_box(cfg)) throw ConfigError("convergence runs on the generated unit box");
  const auto meshes = hierarchy(cfg);
  const auto solver = solver_config(cfg);
  ConvergenceTable t;
  if (cfg.solution == "eigen") {
    t = eigen_error_comparison(meshes, box_eigenfunction(cfg.dim), solver);
    describe(t, cfg);
  } else if (cfg.solution == "sine") {
    describe(t, cfg);
    const auto els = elements(cfg, "ecr,cr", {"ecr", "cr", "rt"});
    const auto sol = sine_solution(cfg.dim);
    const auto f = ScalarLoad::function(sol.f);
    for (std::size_t l = 0; l < meshes.size(); ++l) {
      const auto& m = meshes[l];
      t.add_level(static_cast<int>(l), m.h());
      t.set("osc", oscillation(m, f));
      t.set("gradient_projection_error", gradient_projection_error(m, sol.gradient));
      for (const auto& e : els) {
        t.declare("h1_error_" + e, ConvergenceTable::Kind::Error);
        t.declare("l2_error_" + e, ConvergenceTable::Kind::Error);
        if (e == "rt") {
          const auto rt = solve_poisson_mixed(m, f, solver);
          t.set("h1_error_rt", rt_error(rt.sigma, sol.gradient));
          t.set("l2_error_rt", l2_error(rt.u, sol.u));
          continue;
        }
        const auto u = solve_poisson(m, f, parse_family(e), solver);
        t.set("h1_error_" + e, broken_h1_error(u, sol.gradient));
        t.set("l2_error_" + e, l2_error(u, sol.u));
      }
      std::cout << "level " << l << " done (" << m.num_cells() << " cells)\n";
    }
  } else {
    throw ConfigError("--solution must be sine or eigen");
  }
  emit(cfg, t);
  return 0;
}

int cmd_neumann(const RunConfig& cfg) {
  const auto meshes = hierarchy(cfg);
  const auto els = elements(cfg, "rt,ecr,cr", {"rt", "ecr", "cr"});
  const auto sol = paraboloid_solution(cfg.dim);
  const auto f = ScalarLoad::constant(-2.0 * cfg.dim);
  const BoundaryFlux g = [&](const Vec& x, const Vec& nu) { return sol.gradient(x).dot(nu); };
  const auto solver = solver_config(cfg);
  ConvergenceTable t;
  describe(t, cfg);
  bool ok = true;
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const auto& m = meshes[l];
    t.add_level(static_cast<int>(l), m.h());
    for (const auto& e : els) {
      const NeumannForm form = e == "rt" ? NeumannForm::MixedRT : e == "ecr" ? NeumannForm::PrimalECR
                                                                            : NeumannForm::PrimalCR;
      const auto s = solve_neumann(m, f, g, form, solver);
      const double err = s.sigma ? rt_error(*s.sigma, sol.gradient) : broken_h1_error(s.u, sol.gradient);
      t.declare("h1_error_" + e, ConvergenceTable::Kind::Error);
      t.set("h1_error_" + e, err);
      if (e == "cr") t.set("beta_cr", err / m.h());
      if (e != "cr" && !(err <= cfg.tol)) {
        ok = false;
        std::cerr << "level " << l << " " << e << ": error " << format_double(err) << " is not exact\n";
      }
    }
  }
  emit(cfg, t);
  return ok ? 0 : 1;
}

constexpr const char* kColumns = R"(Output columns (CSV, one row per level, '#' lines record the run):
  poisson      level,h,osc,dofs_<e>[,h1_error_<e>,h1_error_<e>_rate,l2_error_<e>,l2_error_<e>_rate]
  stokes       level,h,dofs_<e>,divergence_residual_<e>
  eigen        level,h,lambda<i>_<e>...,lambda<i>_exact
  equiv        level,h,<problem>_max_relative_residual,<problem>_max_normal_jump (+ equiv.json)
  convergence  level,h,osc,gradient_projection_error,h1_error_<e>,...  (sine)
               level,h,cells,dofs_ecr,dofs_rt,lambda_*,grad_error_ecr,grad_error_rt,ecr_rt_difference (eigen)
  neumann      level,h,h1_error_<e>,...,beta_cr
Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error.
Environment: FEM_THREADS caps worker threads.)";

} // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  for (int i = 1; i < argc; ++i) cfg.command_line += (i > 1 ? " " : "") + std::string(argv[i]);

  CLI::App app{"Nonconforming and mixed simplicial finite elements"};
  app.footer(kColumns);
  app.require_subcommand(1, 1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dim", cfg.dim, "Space dimension (2 or 3)")->check(CLI::Range(2, 3))->capture_default_str();
    sub->add_option("--coarse", cfg.coarse, "Coarse unit-box mesh: diagonal or crisscross")->capture_default_str();
    sub->add_option("--subdivisions", cfg.subdivisions, "Boxes per direction in the coarse mesh")
        ->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--mesh-file", cfg.mesh_file, "Coarse mesh file instead of the unit box");
    sub->add_option("--levels", cfg.levels, "Uniform refinements; levels 0..L are run")
        ->check(CLI::Range(0, 12))->capture_default_str();
    sub->add_option("--rhs", cfg.rhs, "Load: const:<c>[,<c>..], sine, table:<file>, random")->capture_default_str();
    sub->add_option("--elements", cfg.elements, "Comma-separated element list");
    sub->add_option("--tol", cfg.tol, "Check tolerance (relative)")->capture_default_str();
    sub->add_option("--jump-tol", cfg.jump_tol, "Normal-jump tolerance")->capture_default_str();
    sub->add_option("--solver-tol", cfg.solver_tol, "Linear solver relative residual")->capture_default_str();
    sub->add_option("--eigen-tol", cfg.eigen_tol, "Eigen solver relative residual")->capture_default_str();
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    sub->add_flag("--emit-plot", cfg.emit_plot, "Write two-column (h, error) files per error column");
    sub->add_option("--seed", cfg.seed, "Seed for --rhs random")->capture_default_str();
  };

  auto* poisson = app.add_subcommand("poisson", "Dirichlet Poisson problem");
  add_common(poisson);
  poisson->add_flag("--condensed", cfg.condensed, "Solve ECR by static condensation");
  auto* stokes = app.add_subcommand("stokes", "Stokes problem (velocity and pressure)");
  add_common(stokes);
  auto* eigen = app.add_subcommand("eigen", "Dirichlet Laplace eigenvalues");
  add_common(eigen);
  eigen->add_option("--k", cfg.k, "Number of eigenpairs")->check(CLI::Range(1, 10))->capture_default_str();
  auto* equiv = app.add_subcommand("equiv", "Equivalence identity checks");
  add_common(equiv);
  equiv->add_option("--problem", cfg.problem, "poisson, stokes, marini, cgs, eigen or all")->capture_default_str();
  equiv->add_option("--k", cfg.k, "Eigenpairs for --problem eigen")->check(CLI::Range(1, 5))->capture_default_str();
  auto* conv = app.add_subcommand("convergence", "Error tables on refined hierarchies");
  add_common(conv);
  conv->add_option("--solution", cfg.solution, "sine or eigen")->capture_default_str();
  auto* neumann = app.add_subcommand("neumann", "Pure Neumann paraboloid fixture");
  add_common(neumann);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Error& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (cfg.command == "poisson") return cmd_poisson(cfg);
    if (cfg.command == "stokes") return cmd_stokes(cfg);
    if (cfg.command == "eigen") return cmd_eigen(cfg);
    if (cfg.command == "equiv") return cmd_equiv(cfg);
    if (cfg.command == "convergence") return cmd_convergence(cfg);
    if (cfg.command == "neumann") return cmd_neumann(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << format_double(e.achieved_residual()) << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
