#include "podnet/lp.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstring>
#include <queue>

namespace podnet::lp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

int LinearModel::add_var(double lb, double ub, double obj, VarKind kind) {
  if (kind == VarKind::Binary) {
    if (lb < 0.0 || ub > 1.0)
      throw std::invalid_argument("binary variable bounds must be within [0,1]");
  }
  if (lb > ub) throw std::invalid_argument("variable lower bound above upper bound");
  vars.push_back({lb, ub, obj, kind});
  return static_cast<int>(vars.size()) - 1;
}

int LinearModel::add_row(const std::vector<Entry>& terms, Cmp cmp, double rhs) {
  const int64_t begin = static_cast<int64_t>(entries.size());
  for (const Entry& e : terms) {
    if (e.var < 0 || e.var >= num_vars())
      throw std::invalid_argument("constraint references nonexistent variable");
    if (e.coef != 0.0) entries.push_back(e);
  }
  rows.push_back({begin, static_cast<int64_t>(entries.size()), cmp, rhs});
  return static_cast<int>(rows.size()) - 1;
}

bool LinearModel::has_integers() const {
  for (const Var& v : vars)
    if (v.kind == VarKind::Binary) return true;
  return false;
}

double LinearModel::row_activity(int row, const std::vector<double>& x) const {
  const Row& r = rows[row];
  double a = 0.0;
  for (int64_t t = r.begin; t < r.end; ++t) a += entries[t].coef * x[entries[t].var];
  return a;
}

double LinearModel::objective_value(const std::vector<double>& x) const {
  double z = 0.0;
  for (int j = 0; j < num_vars(); ++j) z += vars[j].obj * x[j];
  return z;
}

double LinearModel::max_violation(const std::vector<double>& x) const {
  double v = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    v = std::max(v, vars[j].lb - x[j]);
    v = std::max(v, x[j] - vars[j].ub);
  }
  for (int i = 0; i < num_rows(); ++i) {
    const double a = row_activity(i, x);
    const Row& r = rows[i];
    if (r.cmp == Cmp::LessEqual || r.cmp == Cmp::Equal) v = std::max(v, a - r.rhs);
    if (r.cmp == Cmp::GreaterEqual || r.cmp == Cmp::Equal) v = std::max(v, r.rhs - a);
  }
  return v;
}

namespace {

// ---------------------------------------------------------------------------
// Sparse LU of the basis (Gilbert-Peierls left-looking factorization with
// partial pivoting) plus a product-form eta file for basis updates.
// ---------------------------------------------------------------------------

struct SparseVec {
  std::vector<int> idx;
  std::vector<double> val;
  void clear() {
    idx.clear();
    val.clear();
  }
};

class BasisLU {
 public:
  void reset(int m) {
    m_ = m;
    lcol_.assign(m, {});
    ucol_.assign(m, {});
    udiag_.assign(m, 0.0);
    pinv_.assign(m, -1);
    prow_.assign(m, -1);
    etas_.clear();
    eta_pos_.clear();
    work_.assign(m, 0.0);
    mark_.assign(m, 0);
    stamp_ = 0;
  }

  int eta_count() const { return static_cast<int>(etas_.size()); }

  // Factors the m columns given as sparse (row,val) lists. Returns false on
  // singularity.
  bool factor(const std::vector<SparseVec>& cols) {
    const int m = m_;
    for (int t = 0; t < m; ++t) {
      lcol_[t].clear();
      ucol_[t].clear();
      udiag_[t] = 0.0;
    }
    std::fill(pinv_.begin(), pinv_.end(), -1);
    std::fill(prow_.begin(), prow_.end(), -1);
    etas_.clear();
    eta_pos_.clear();

    std::vector<double>& x = work_;
    std::vector<int> touched;
    std::vector<int> order;
    std::vector<int> dfs_stack, dfs_edge;
    for (int j = 0; j < m; ++j) {
      // Symbolic: topological order of pivoted rows reachable from col j.
      ++stamp_;
      order.clear();
      for (size_t s = 0; s < cols[j].idx.size(); ++s) {
        int r = cols[j].idx[s];
        if (mark_[r] == stamp_) continue;
        dfs_stack.clear();
        dfs_edge.clear();
        dfs_stack.push_back(r);
        dfs_edge.push_back(0);
        mark_[r] = stamp_;
        while (!dfs_stack.empty()) {
          int row = dfs_stack.back();
          int t = pinv_[row];
          bool descended = false;
          if (t >= 0) {
            int& e = dfs_edge.back();
            const auto& lc = lcol_[t];
            while (e < static_cast<int>(lc.idx.size())) {
              int child = lc.idx[e++];
              if (mark_[child] != stamp_) {
                mark_[child] = stamp_;
                dfs_stack.push_back(child);
                dfs_edge.push_back(0);
                descended = true;
                break;
              }
            }
          }
          if (!descended) {
            if (t >= 0) order.push_back(row);
            dfs_stack.pop_back();
            dfs_edge.pop_back();
          }
        }
      }
      std::reverse(order.begin(), order.end());

      // Numeric solve L x = col_j on the reached pattern.
      touched.clear();
      for (size_t s = 0; s < cols[j].idx.size(); ++s) {
        x[cols[j].idx[s]] += cols[j].val[s];
        touched.push_back(cols[j].idx[s]);
      }
      for (int row : order) {
        const int t = pinv_[row];
        const double xr = x[row];
        if (xr == 0.0) continue;
        const auto& lc = lcol_[t];
        for (size_t s = 0; s < lc.idx.size(); ++s) {
          if (x[lc.idx[s]] == 0.0) touched.push_back(lc.idx[s]);
          x[lc.idx[s]] -= xr * lc.val[s];
        }
      }
      // gather all rows seen (order rows + raw fill)
      // pivot: largest magnitude among unpivoted rows
      int prow = -1;
      double pmax = 0.0;
      for (int row : touched) {
        if (pinv_[row] >= 0) continue;
        const double a = std::fabs(x[row]);
        if (a > pmax + 1e-300 || (a == pmax && (prow < 0 || row < prow))) {
          pmax = a;
          prow = row;
        }
      }
      if (prow < 0 || pmax < 1e-11) {
        for (int row : touched) x[row] = 0.0;
        return false;
      }
      const double piv = x[prow];
      pinv_[prow] = j;
      prow_[j] = prow;
      udiag_[j] = piv;
      for (int row : touched) {
        const double v = x[row];
        x[row] = 0.0;
        if (v == 0.0 || row == prow) continue;
        const int t = pinv_[row];
        if (t >= 0 && t < j) {
          ucol_[j].idx.push_back(t);
          ucol_[j].val.push_back(v);
        } else if (t < 0) {
          lcol_[j].idx.push_back(row);
          lcol_[j].val.push_back(v / piv);
        }
      }
    }
    // Re-map L row indices into pivot space for the solves.
    for (int t = 0; t < m; ++t)
      for (size_t s = 0; s < lcol_[t].idx.size(); ++s)
        lcol_[t].idx[s] = pinv_[lcol_[t].idx[s]];
    return true;
  }

  // x := B^{-1} v. Dense in/out (size m, indexed by basis position).
  void ftran(std::vector<double>& v) const {
    std::vector<double>& w = ftmp_;
    w.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) w[pinv_[r]] = v[r];
    for (int t = 0; t < m_; ++t) {
      const double wt = w[t];
      if (wt == 0.0) continue;
      const auto& lc = lcol_[t];
      for (size_t s = 0; s < lc.idx.size(); ++s) w[lc.idx[s]] -= wt * lc.val[s];
    }
    for (int t = m_ - 1; t >= 0; --t) {
      double wt = w[t];
      if (wt == 0.0) continue;
      wt /= udiag_[t];
      w[t] = wt;
      const auto& uc = ucol_[t];
      for (size_t s = 0; s < uc.idx.size(); ++s) w[uc.idx[s]] -= wt * uc.val[s];
    }
    // w is indexed by pivot step == basis position of factorization columns
    v = w;
    // apply etas in order
    for (size_t k = 0; k < etas_.size(); ++k) {
      const int r = eta_pos_[k];
      const SparseVec& d = etas_[k];
      double vr = v[r];
      // diagonal entry of eta stored separately in val[0] position convention:
      // etas_[k].idx/val hold the full column d (including position r).
      // x_r' = v_r / d_r ; x_i -= d_i * x_r'
      double dr = eta_diag_[k];
      vr /= dr;
      for (size_t s = 0; s < d.idx.size(); ++s) {
        v[d.idx[s]] -= d.val[s] * vr;
      }
      v[r] = vr;
    }
  }

  // y := B^{-T} c. Dense in/out (size m); input indexed by basis position,
  // output indexed by original row.
  void btran(std::vector<double>& v, std::vector<double>& out_by_row) const {
    // reverse etas first
    for (int k = static_cast<int>(etas_.size()) - 1; k >= 0; --k) {
      const int r = eta_pos_[k];
      const SparseVec& d = etas_[k];
      double acc = 0.0;
      for (size_t s = 0; s < d.idx.size(); ++s) acc += d.val[s] * v[d.idx[s]];
      v[r] = (v[r] - acc) / eta_diag_[k];
    }
    // solve U^T z = v (forward over columns)
    std::vector<double>& z = ftmp_;
    z.assign(m_, 0.0);
    for (int t = 0; t < m_; ++t) {
      double acc = v[t];
      const auto& uc = ucol_[t];
      for (size_t s = 0; s < uc.idx.size(); ++s) acc -= uc.val[s] * z[uc.idx[s]];
      z[t] = acc / udiag_[t];
    }
    // solve L^T w = z (backward)
    for (int t = m_ - 1; t >= 0; --t) {
      double acc = z[t];
      const auto& lc = lcol_[t];
      for (size_t s = 0; s < lc.idx.size(); ++s) acc -= lc.val[s] * z[lc.idx[s]];
      z[t] = acc;
    }
    out_by_row.assign(m_, 0.0);
    for (int t = 0; t < m_; ++t) out_by_row[prow_[t]] = z[t];
  }

  // Registers the basis change: column at basis position r replaced; d is the
  // FTRAN'd entering column (dense by position). Returns false when the eta
  // pivot is too small (caller should refactor instead).
  bool update(int r, const std::vector<double>& d) {
    const double dr = d[r];
    if (std::fabs(dr) < 1e-9) return false;
    SparseVec e;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      if (d[i] != 0.0) {
        e.idx.push_back(i);
        e.val.push_back(d[i]);
      }
    }
    etas_.push_back(std::move(e));
    eta_pos_.push_back(r);
    eta_diag_.push_back(dr);
    return true;
  }

 private:
  int m_ = 0;
  std::vector<SparseVec> lcol_;  // L columns in pivot space (unit diagonal)
  std::vector<SparseVec> ucol_;  // U columns (strictly upper part)
  std::vector<double> udiag_;
  std::vector<int> pinv_, prow_;
  std::vector<SparseVec> etas_;
  std::vector<int> eta_pos_;
  std::vector<double> eta_diag_;
  mutable std::vector<double> work_, ftmp_;
  mutable std::vector<int> mark_;
  mutable int stamp_ = 0;
};

// ---------------------------------------------------------------------------
// Bounded-variable primal simplex. Internally always minimizes; logical
// (slack) variables are appended after the structural ones so the all-logical
// basis is the crash basis.
// ---------------------------------------------------------------------------

enum VStat : signed char { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFree = 3 };

class Simplex {
 public:
  Simplex(const LinearModel& model, SimplexOptions opt)
      : opt_(opt), m_(model.num_rows()), ns_(model.num_vars()), n_(ns_ + m_) {
    flip_ = model.sense == Sense::Maximize ? -1.0 : 1.0;
    lb_.resize(n_);
    ub_.resize(n_);
    cost_.assign(n_, 0.0);
    for (int j = 0; j < ns_; ++j) {
      lb_[j] = model.vars[j].lb;
      ub_[j] = model.vars[j].ub;
      cost_[j] = flip_ * model.vars[j].obj;
    }
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const LinearModel::Row& r = model.rows[i];
      rhs_[i] = r.rhs;
      const int sj = ns_ + i;
      switch (r.cmp) {
        case Cmp::LessEqual:
          lb_[sj] = 0.0;
          ub_[sj] = kInf;
          break;
        case Cmp::GreaterEqual:
          lb_[sj] = -kInf;
          ub_[sj] = 0.0;
          break;
        case Cmp::Equal:
          lb_[sj] = 0.0;
          ub_[sj] = 0.0;
          break;
      }
    }
    // CSC of structurals
    colptr_.assign(ns_ + 1, 0);
    for (const auto& e : model.entries) colptr_[e.var + 1]++;
    for (int j = 0; j < ns_; ++j) colptr_[j + 1] += colptr_[j];
    colrow_.resize(model.entries.size());
    colval_.resize(model.entries.size());
    {
      std::vector<int64_t> fill(colptr_.begin(), colptr_.end() - 1);
      for (int i = 0; i < m_; ++i) {
        const LinearModel::Row& r = model.rows[i];
        for (int64_t t = r.begin; t < r.end; ++t) {
          const auto& e = model.entries[t];
          colrow_[fill[e.var]] = i;
          colval_[fill[e.var]] = e.coef;
          ++fill[e.var];
        }
      }
    }
    crash();
  }

  void set_bounds(int j, double lo, double hi) {
    lb_[j] = lo;
    ub_[j] = hi;
    if (vstat_[j] != kBasic) {
      vstat_[j] = pick_nb_stat(j);
      xval_[j] = nb_value(j);
    }
    basics_stale_ = true;
  }

  double lower(int j) const { return lb_[j]; }
  double upper(int j) const { return ub_[j]; }

  SolveStatus solve() {
    if (basics_stale_) {
      if (!refactor()) return SolveStatus::Infeasible;  // singular: should not happen
      recompute_basics();
      basics_stale_ = false;
    }
    for (int attempt = 0; attempt < 4; ++attempt) {
      SolveStatus st = run();
      if (st != SolveStatus::Optimal) return st;
      // verify on a fresh factorization
      refactor();
      recompute_basics();
      if (max_primal_infeas() <= opt_.feas_tol * 10) return SolveStatus::Optimal;
    }
    throw NumericalError("simplex: feasibility tolerance not met after restarts");
  }

  double objective() const {
    double z = 0.0;
    for (int j = 0; j < ns_; ++j) z += cost_[j] * xval_[j];
    return flip_ * z;
  }

  void extract(Solution& sol, bool want_duals) {
    sol.x.assign(ns_, 0.0);
    for (int j = 0; j < ns_; ++j) sol.x[j] = xval_[j];
    sol.objective = objective();
    if (want_duals) {
      std::vector<double> cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      std::vector<double> y;
      lu_.btran(cb, y);
      sol.row_duals.assign(m_, 0.0);
      for (int i = 0; i < m_; ++i) sol.row_duals[i] = flip_ * y[i];
    }
  }

  int64_t iterations() const { return iters_; }

 private:
  double pick_nb_stat_value(int j) const { return nb_value(j); }

  signed char pick_nb_stat(int j) const {
    if (std::isfinite(lb_[j])) return kAtLower;
    if (std::isfinite(ub_[j])) return kAtUpper;
    return kFree;
  }

  double nb_value(int j) const {
    switch (vstat_[j]) {
      case kAtLower: return lb_[j];
      case kAtUpper: return ub_[j];
      default: return 0.0;
    }
  }

  void crash() {
    vstat_.assign(n_, kAtLower);
    xval_.assign(n_, 0.0);
    basis_.resize(m_);
    inbasis_pos_.assign(n_, -1);
    for (int j = 0; j < ns_; ++j) {
      vstat_[j] = pick_nb_stat(j);
      xval_[j] = nb_value(j);
    }
    for (int i = 0; i < m_; ++i) {
      basis_[i] = ns_ + i;
      vstat_[ns_ + i] = kBasic;
      inbasis_pos_[ns_ + i] = i;
    }
    refactor();
    recompute_basics();
    basics_stale_ = false;
  }

  void gather_basis_cols(std::vector<SparseVec>& cols) const {
    cols.assign(m_, {});
    for (int p = 0; p < m_; ++p) {
      const int j = basis_[p];
      if (j >= ns_) {
        cols[p].idx.push_back(j - ns_);
        cols[p].val.push_back(1.0);
      } else {
        for (int64_t t = colptr_[j]; t < colptr_[j + 1]; ++t) {
          cols[p].idx.push_back(colrow_[t]);
          cols[p].val.push_back(colval_[t]);
        }
      }
    }
  }

  bool refactor() {
    std::vector<SparseVec> cols;
    gather_basis_cols(cols);
    lu_.reset(m_);
    if (lu_.factor(cols)) return true;
    // Singular basis: fall back to the all-logical basis and let phase 1
    // recover feasibility.
    for (int j = 0; j < n_; ++j)
      if (vstat_[j] == kBasic) {
        vstat_[j] = pick_nb_stat(j);
        xval_[j] = nb_value(j);
        inbasis_pos_[j] = -1;
      }
    for (int i = 0; i < m_; ++i) {
      basis_[i] = ns_ + i;
      vstat_[ns_ + i] = kBasic;
      inbasis_pos_[ns_ + i] = i;
    }
    gather_basis_cols(cols);
    lu_.reset(m_);
    return lu_.factor(cols);
  }

  // column j of [A I] scattered into dense vector by row
  void scatter_col(int j, std::vector<double>& dense) const {
    if (j >= ns_) {
      dense[j - ns_] += 1.0;
      return;
    }
    for (int64_t t = colptr_[j]; t < colptr_[j + 1]; ++t)
      dense[colrow_[t]] += colval_[t];
  }

  void recompute_basics() {
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (vstat_[j] == kBasic) continue;
      const double v = nb_value(j);
      xval_[j] = v;
      if (v == 0.0) continue;
      if (j >= ns_) {
        act[j - ns_] += v;
      } else {
        for (int64_t t = colptr_[j]; t < colptr_[j + 1]; ++t)
          act[colrow_[t]] += colval_[t] * v;
      }
    }
    std::vector<double> b(m_);
    for (int i = 0; i < m_; ++i) b[i] = rhs_[i] - act[i];
    lu_.ftran(b);
    for (int p = 0; p < m_; ++p) xval_[basis_[p]] = b[p];
  }

  double max_primal_infeas() const {
    double v = 0.0;
    for (int p = 0; p < m_; ++p) {
      const int j = basis_[p];
      v = std::max(v, lb_[j] - xval_[j]);
      v = std::max(v, xval_[j] - ub_[j]);
    }
    return v;
  }

  // Phase-1 cost of basic variable at position p (0 when feasible).
  double phase1_cost(int j) const {
    if (xval_[j] < lb_[j] - opt_.feas_tol) return -1.0;
    if (xval_[j] > ub_[j] + opt_.feas_tol) return 1.0;
    return 0.0;
  }

  double phase1_sum() const {
    double s = 0.0;
    for (int p = 0; p < m_; ++p) {
      const int j = basis_[p];
      s += std::max(0.0, lb_[j] - xval_[j]);
      s += std::max(0.0, xval_[j] - ub_[j]);
    }
    return s;
  }

  SolveStatus run() {
    int stall = 0;
    bool bland = false;
    bool was_phase1 = true;
    double last_obj = kInf;
    std::vector<double> y, col, cb(m_);
    int64_t since_refactor = 0;

    while (true) {
      if (++iters_ > opt_.max_iterations)
        throw NumericalError("simplex iteration limit exceeded");
      const bool phase1 = max_primal_infeas() > opt_.feas_tol;
      if (phase1 != was_phase1) {
        was_phase1 = phase1;
        last_obj = kInf;
        stall = 0;
        bland = false;
      }

      // dual prices for the active cost vector
      for (int p = 0; p < m_; ++p)
        cb[p] = phase1 ? phase1_cost(basis_[p]) : cost_[basis_[p]];
      lu_.btran(cb, y);

      // pricing: most negative reduced-cost direction (Dantzig), lowest index
      // on ties; Bland (first eligible) when stalled
      int enter = -1;
      double best = -opt_.opt_tol;
      int dir = 0;
      for (int j = 0; j < n_; ++j) {
        if (vstat_[j] == kBasic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed
        double d = phase1 ? 0.0 : (j < ns_ ? cost_[j] : 0.0);
        if (j >= ns_) {
          d -= y[j - ns_];
        } else {
          double acc = 0.0;
          for (int64_t t = colptr_[j]; t < colptr_[j + 1]; ++t)
            acc += colval_[t] * y[colrow_[t]];
          d -= acc;
        }
        double score = 0.0;
        int cand_dir = 0;
        if ((vstat_[j] == kAtLower || vstat_[j] == kFree) && d < best) {
          score = d;
          cand_dir = +1;
        } else if ((vstat_[j] == kAtUpper || vstat_[j] == kFree) && -d < best) {
          score = -d;
          cand_dir = -1;
        }
        if (cand_dir != 0) {
          if (bland) {
            enter = j;
            dir = cand_dir;
            break;
          }
          best = score;
          enter = j;
          dir = cand_dir;
        }
      }

      if (enter < 0) return phase1 ? SolveStatus::Infeasible : SolveStatus::Optimal;

      // FTRAN entering column
      col.assign(m_, 0.0);
      scatter_col(enter, col);
      lu_.ftran(col);

      // Ratio test. t >= 0 is the distance the entering variable moves from
      // its bound; basic value p changes at rate -dir*col[p]. In phase 1 an
      // infeasible basic blocks only when it reaches the violated bound.
      double tbest = ub_[enter] - lb_[enter];  // bound-flip cap (may be inf)
      int leave_pos = -1;
      double leave_to = 0.0;
      double pivot_abs = 0.0;
      for (int p = 0; p < m_; ++p) {
        const double w = col[p];
        if (std::fabs(w) < 1e-11) continue;
        const int j = basis_[p];
        const double rate = -dir * w;
        double limit = kInf;
        double land = 0.0;
        const double pc = phase1 ? phase1_cost(j) : 0.0;
        if (pc < 0.0) {
          if (rate > 0) {
            limit = (lb_[j] - xval_[j]) / rate;
            land = lb_[j];
          }
        } else if (pc > 0.0) {
          if (rate < 0) {
            limit = (ub_[j] - xval_[j]) / rate;
            land = ub_[j];
          }
        } else if (rate > 0 && std::isfinite(ub_[j])) {
          limit = (ub_[j] - xval_[j]) / rate;
          land = ub_[j];
        } else if (rate < 0 && std::isfinite(lb_[j])) {
          limit = (lb_[j] - xval_[j]) / rate;
          land = lb_[j];
        }
        if (!std::isfinite(limit)) continue;
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < tbest - 1e-12) {
          take = true;
        } else if (leave_pos >= 0 && limit <= tbest + 1e-12) {
          if (bland) {
            take = j < basis_[leave_pos];
          } else if (std::fabs(w) > pivot_abs * (1.0 + 1e-12)) {
            take = true;
          } else if (std::fabs(w) >= pivot_abs * (1.0 - 1e-12) && j < basis_[leave_pos]) {
            take = true;
          }
        } else if (leave_pos < 0 && limit <= tbest) {
          take = true;
        }
        if (take) {
          tbest = std::min(tbest, limit);
          leave_pos = p;
          leave_to = land;
          pivot_abs = std::fabs(w);
        }
      }

      if (leave_pos < 0) {
        if (!std::isfinite(tbest))
          return phase1 ? SolveStatus::Infeasible : SolveStatus::Unbounded;
        // bound flip, no basis change
        for (int p = 0; p < m_; ++p)
          if (col[p] != 0.0) xval_[basis_[p]] -= dir * tbest * col[p];
        vstat_[enter] = (vstat_[enter] == kAtLower) ? kAtUpper : kAtLower;
        xval_[enter] = nb_value(enter);
      } else {
        const double t = std::max(tbest, 0.0);
        for (int p = 0; p < m_; ++p)
          if (col[p] != 0.0) xval_[basis_[p]] -= dir * t * col[p];
        const int out = basis_[leave_pos];
        xval_[enter] = nb_value(enter) + dir * t;
        xval_[out] = leave_to;
        if (std::isfinite(leave_to) && leave_to == ub_[out] && leave_to != lb_[out])
          vstat_[out] = kAtUpper;
        else if (std::isfinite(leave_to))
          vstat_[out] = kAtLower;
        else
          vstat_[out] = kFree;
        inbasis_pos_[out] = -1;
        basis_[leave_pos] = enter;
        vstat_[enter] = kBasic;
        inbasis_pos_[enter] = leave_pos;
        if (!lu_.update(leave_pos, col) || ++since_refactor >= 100) {
          refactor();
          recompute_basics();
          since_refactor = 0;
        }
      }

      const double obj = phase1 ? phase1_sum() : objective_internal();
      if (obj < last_obj - 1e-12) {
        last_obj = obj;
        stall = 0;
        bland = false;
      } else if (++stall > 5000) {
        bland = true;
      }
    }
  }

  double objective_internal() const {
    double z = 0.0;
    for (int j = 0; j < ns_; ++j) z += cost_[j] * xval_[j];
    return z;
  }

  SimplexOptions opt_;
  int m_, ns_, n_;
  double flip_ = 1.0;
  std::vector<double> lb_, ub_, cost_, rhs_;
  std::vector<int64_t> colptr_;
  std::vector<int> colrow_;
  std::vector<double> colval_;
  std::vector<int> basis_;
  std::vector<int> inbasis_pos_;
  std::vector<signed char> vstat_;
  std::vector<double> xval_;
  BasisLU lu_;
  int64_t iters_ = 0;
  bool basics_stale_ = false;
};

}  // namespace

Solution solve_lp(const LinearModel& model, const SimplexOptions& opt) {
  for (const auto& v : model.vars)
    if (v.kind != VarKind::Continuous)
      throw std::invalid_argument("solve_lp requires a continuous model");
  Simplex sx(model, opt);
  Solution sol;
  sol.status = sx.solve();
  if (sol.status == SolveStatus::Optimal) {
    sx.extract(sol, opt.want_duals);
    sol.dual_bound = sol.objective;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

namespace {

struct BnbNode {
  double bound;           // parent LP objective (internal min sense)
  int64_t id;
  std::vector<std::pair<int, int>> fixings;  // (var, value)
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

}  // namespace

Solution solve_milp(const LinearModel& model, const MilpBudget& budget,
                    const std::vector<double>* warm, const SimplexOptions& opt) {
  std::vector<int> bins;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.vars[j].kind == VarKind::Binary) bins.push_back(j);
  if (bins.empty()) return solve_lp(model, opt);

  const double flip = model.sense == Sense::Maximize ? -1.0 : 1.0;
  const auto t0 = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (budget.max_seconds <= 0) return false;
    const auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double>(dt).count() > budget.max_seconds;
  };

  Simplex sx(model, opt);
  auto reset_bounds = [&](const std::vector<std::pair<int, int>>& fixings) {
    for (int j : bins) sx.set_bounds(j, model.vars[j].lb, model.vars[j].ub);
    for (auto [j, v] : fixings) sx.set_bounds(j, v, v);
  };

  Solution best;
  best.status = SolveStatus::Infeasible;
  bool have_incumbent = false;
  double incumbent_internal = kInf;

  auto consider_incumbent = [&](const Solution& s) {
    const double zi = flip * s.objective;
    if (!have_incumbent || zi < incumbent_internal - budget.gap_abs) {
      incumbent_internal = zi;
      best.x = s.x;
      best.objective = s.objective;
      have_incumbent = true;
    }
  };

  auto lp_at = [&](const std::vector<std::pair<int, int>>& fixings, Solution& s) {
    reset_bounds(fixings);
    s = Solution{};
    s.status = sx.solve();
    if (s.status == SolveStatus::Optimal) sx.extract(s, false);
    return s.status;
  };

  auto fractional_of = [&](const Solution& s) {
    int pick = -1;
    double score = budget.int_tol;
    for (int j : bins) {
      const double f = std::fabs(s.x[j] - std::round(s.x[j]));
      if (f > score + 1e-12) {
        score = f;
        // most fractional: distance to 0.5 minimal; we track closeness to 0.5
      }
    }
    // second pass: most fractional = min |x - 0.5|, ties lowest index
    double bestd = 1.0;
    for (int j : bins) {
      const double f = std::fabs(s.x[j] - std::round(s.x[j]));
      if (f <= budget.int_tol) continue;
      const double d = std::fabs(s.x[j] - 0.5);
      if (d < bestd - 1e-12) {
        bestd = d;
        pick = j;
      }
    }
    return pick;
  };

  // Initial incumbent from the warm assignment, if feasible.
  if (warm && static_cast<int>(warm->size()) == model.num_vars()) {
    std::vector<std::pair<int, int>> fix;
    fix.reserve(bins.size());
    bool ok = true;
    for (int j : bins) {
      const double v = (*warm)[j];
      const int b = static_cast<int>(std::round(v));
      if (b < 0 || b > 1 || std::fabs(v - b) > 1e-6) {
        ok = false;
        break;
      }
      fix.push_back({j, b});
    }
    Solution s;
    if (ok && lp_at(fix, s) == SolveStatus::Optimal) consider_incumbent(s);
  }

  // Root relaxation.
  Solution root;
  const SolveStatus root_st = lp_at({}, root);
  if (root_st == SolveStatus::Infeasible) {
    best.status = have_incumbent ? SolveStatus::Optimal : SolveStatus::Infeasible;
    if (have_incumbent) best.dual_bound = best.objective;
    return best;
  }
  if (root_st == SolveStatus::Unbounded)
    throw std::invalid_argument("milp relaxation unbounded");

  double global_bound = flip * root.objective;  // internal min sense

  // Root dive for an incumbent.
  {
    std::vector<std::pair<int, int>> fix;
    Solution cur = root;
    for (size_t depth = 0; depth <= bins.size(); ++depth) {
      const int j = fractional_of(cur);
      if (j < 0) {
        consider_incumbent(cur);
        break;
      }
      const int v = static_cast<int>(std::round(cur.x[j]));
      fix.push_back({j, v});
      if (lp_at(fix, cur) != SolveStatus::Optimal) {
        fix.back().second = 1 - v;
        if (lp_at(fix, cur) != SolveStatus::Optimal) break;
      }
    }
  }

  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
  int64_t next_id = 0;
  open.push({flip * root.objective, next_id++, {}});
  int64_t explored = 0;
  bool exhausted = false;

  while (!open.empty()) {
    if (explored >= budget.max_nodes || out_of_time()) {
      exhausted = true;
      break;
    }
    BnbNode node = open.top();
    open.pop();
    global_bound = node.bound;
    if (have_incumbent && node.bound >= incumbent_internal - budget.gap_abs) {
      // best-bound order: every remaining node is dominated
      global_bound = incumbent_internal;
      break;
    }
    ++explored;
    Solution s;
    const SolveStatus st = lp_at(node.fixings, s);
    if (st != SolveStatus::Optimal) continue;
    const double zi = flip * s.objective;
    if (have_incumbent && zi >= incumbent_internal - budget.gap_abs) continue;
    const int j = fractional_of(s);
    if (j < 0) {
      consider_incumbent(s);
      continue;
    }
    const int near = static_cast<int>(std::round(s.x[j]));
    for (int side = 0; side < 2; ++side) {
      BnbNode child;
      child.bound = zi;
      child.id = next_id++;
      child.fixings = node.fixings;
      child.fixings.push_back({j, side == 0 ? near : 1 - near});
      open.push(std::move(child));
    }
  }

  if (!open.empty() && !exhausted) global_bound = incumbent_internal;
  if (open.empty() && !exhausted && have_incumbent) global_bound = incumbent_internal;

  best.nodes = explored;
  if (have_incumbent) {
    best.status = exhausted ? SolveStatus::BudgetExhausted : SolveStatus::Optimal;
    best.dual_bound = flip * std::min(global_bound, incumbent_internal);
  } else {
    best.status = exhausted ? SolveStatus::BudgetExhausted : SolveStatus::Infeasible;
    best.dual_bound = flip * global_bound;
  }
  return best;
}

}  // namespace podnet::lp
