#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace podnet::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Cmp { LessEqual, Equal, GreaterEqual };
enum class VarKind { Continuous, Binary };

enum class SolveStatus { Optimal, Infeasible, Unbounded, BudgetExhausted };

const char* to_string(SolveStatus s);

/// Raised when the simplex cannot reach the feasibility tolerance.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sparse linear model: variables with bounds, rows with a comparator,
/// and a single linear objective. Row entries are stored row-major in
/// one flat array.
struct LinearModel {
  struct Var {
    double lb = 0.0;
    double ub = kInf;
    double obj = 0.0;
    VarKind kind = VarKind::Continuous;
  };
  struct Entry {
    int32_t var;
    double coef;
  };
  struct Row {
    int64_t begin;
    int64_t end;
    Cmp cmp;
    double rhs;
  };

  Sense sense = Sense::Minimize;
  std::vector<Var> vars;
  std::vector<Row> rows;
  std::vector<Entry> entries;

  int add_var(double lb, double ub, double obj,
              VarKind kind = VarKind::Continuous);
  int add_row(const std::vector<Entry>& terms, Cmp cmp, double rhs);

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int64_t num_entries() const { return static_cast<int64_t>(entries.size()); }
  bool has_integers() const;

  /// Activity of one row for a full assignment.
  double row_activity(int row, const std::vector<double>& x) const;
  /// Objective value for a full assignment.
  double objective_value(const std::vector<double>& x) const;
  /// Max bound/row violation of an assignment (ignores integrality).
  double max_violation(const std::vector<double>& x) const;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  /// LP only: one dual multiplier per row, signed so that
  /// objective == sum(dual[i] * rhs[i]) + bound contributions.
  std::vector<double> row_duals;
  /// MILP only: best proven bound on the objective.
  double dual_bound = 0.0;
  int64_t nodes = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SimplexOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;
  int64_t max_iterations = 50'000'000;
  bool want_duals = true;
};

struct MilpBudget {
  int64_t max_nodes = 200'000;
  double max_seconds = -1.0;  // <= 0: no wall-clock limit (deterministic)
  double int_tol = 1e-6;
  double gap_abs = 1e-9;
};

/// Solves a pure LP with a sparse bounded-variable primal simplex
/// (Bland-style anti-cycling, deterministic lowest-index tie breaks).
Solution solve_lp(const LinearModel& model, const SimplexOptions& opt = {});

/// Branch and bound over the binary variables: best-bound node order,
/// branching on the most fractional binary (lowest index on ties).
/// `warm` optionally supplies a feasible assignment used as the initial
/// incumbent after rounding binaries and re-solving the continuous part.
Solution solve_milp(const LinearModel& model, const MilpBudget& budget = {},
                    const std::vector<double>* warm = nullptr,
                    const SimplexOptions& opt = {});

/// MPS text format (fixed field layout, OBJSENSE extension for
/// maximization, one coefficient per COLUMNS line).
void write_mps(const LinearModel& model, std::ostream& os,
               const std::string& name = "PODNET");
void write_mps_file(const LinearModel& model, const std::string& path,
                    const std::string& name = "PODNET");
LinearModel read_mps(std::istream& is);
LinearModel read_mps_file(const std::string& path);

}  // namespace podnet::lp
