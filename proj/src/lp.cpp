// Copyright 2026 The flexnr Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flexnr/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace flexnr {

LinearProgram build_lp(const Instance& inst) {
  LinearProgram lp;
  lp.num_services = inst.num_services();
  const std::vector<int> lat = inst.latency_ids();
  lp.num_demand_rows = static_cast<int>(lat.size());
  lp.num_unit_rows = inst.grid.num_units();
  lp.rhs.assign(lp.num_rows(), 1.0);

  std::vector<int> demand_row_of(inst.num_services(), -1);
  for (size_t i = 0; i < lat.size(); ++i) {
    demand_row_of[lat[i]] = static_cast<int>(i);
    lp.rhs[i] = inst.services[lat[i]].demand_bits;
  }

  for (int b = 0; b < inst.num_blocks(); ++b) {
    for (int k = 0; k < inst.num_services(); ++k) {
      const double r = inst.rate(b, k);
      if (r <= 0.0) continue;  // no objective and no demand contribution
      LinearProgram::Column col;
      col.block = b;
      col.service = k;
      if (inst.services[k].cls == ServiceClass::CAPACITY) {
        col.obj = r;
      } else {
        col.entries.emplace_back(demand_row_of[k], r);
      }
      for (int u : inst.blocks[b].coverage) {
        col.entries.emplace_back(lp.num_demand_rows + u, 1.0);
      }
      lp.cols.push_back(std::move(col));
    }
  }
  return lp;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Anti-degeneracy: '<=' rows get a deterministic tiny rhs relaxation that
// breaks ratio-test ties; the unperturbed basic values are restored after
// termination through the slack columns of the final tableau. The objective
// reported is the perturbed one, which upper-bounds the exact optimum.
constexpr double kPerturb = 1e-8;

enum VarState : uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

/// Dense bounded-variable simplex. Variables: structural columns, then one
/// slack per row, then one artificial per demand row.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, double tol, long long max_iters)
      : lp_(lp), tol_(tol), max_iters_(max_iters) {
    m_ = lp.num_rows();
    n_struct_ = static_cast<int>(lp.cols.size());
    n_art_ = lp.num_demand_rows;
    n_ = n_struct_ + m_ + n_art_;
    tab_.assign(static_cast<size_t>(m_) * n_, 0.0);
    val_.assign(m_, 0.0);
    lb_.assign(n_, 0.0);
    ub_.assign(n_, kInf);
    state_.assign(n_, kAtLower);
    basis_.assign(m_, -1);
    c1_.assign(n_, 0.0);
    c2_.assign(n_, 0.0);
    d1_.assign(n_, 0.0);
    d2_.assign(n_, 0.0);

    for (int j = 0; j < n_struct_; ++j) {
      ub_[j] = 1.0;
      // Objective coefficients get a tiny deterministic upward relative
      // perturbation so duplicate columns stop tying in the pricing step.
      // Costs only increase, so the reported optimum stays a valid upper
      // bound (inflated by at most 2e-10 relative).
      const double cost_eps =
          1.0 + 1e-10 * (1.0 + static_cast<double>((j * 2654435761u) % 1024) / 1024.0);
      c2_[j] = lp.cols[j].obj * cost_eps;
      double* col = &tab_[0];
      for (const auto& [row, a] : lp.cols[j].entries) {
        col[static_cast<size_t>(row) * n_ + j] = a;
      }
    }
    perturb_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const int slack = n_struct_ + r;
      const bool is_demand = r < lp.num_demand_rows;
      tab_[static_cast<size_t>(r) * n_ + slack] = is_demand ? -1.0 : 1.0;
      if (is_demand) {
        const int art = n_struct_ + m_ + r;
        tab_[static_cast<size_t>(r) * n_ + art] = 1.0;
        c1_[art] = -1.0;
        basis_[r] = art;
        val_[r] = lp.rhs[r];
        state_[art] = kBasic;
      } else {
        perturb_[r] = kPerturb * (1.0 + static_cast<double>((r * 2654435761u) % 1024) / 1024.0);
        basis_[r] = slack;
        val_[r] = lp.rhs[r] + perturb_[r];
        state_[slack] = kBasic;
      }
    }
    // Initial reduced costs d = c - c_B * tab (basis columns are identity).
    for (int j = 0; j < n_; ++j) {
      double acc1 = c1_[j], acc2 = c2_[j];
      for (int r = 0; r < m_; ++r) {
        const double a = tab_[static_cast<size_t>(r) * n_ + j];
        if (a != 0.0) {
          acc1 -= c1_[basis_[r]] * a;
          acc2 -= c2_[basis_[r]] * a;
        }
      }
      d1_[j] = acc1;
      d2_[j] = acc2;
    }
  }

  LPSolution run() {
    LPSolution sol;
    if (!iterate(/*phase1=*/true)) {
      sol.status = LPStatus::ITERATION_LIMIT;
      sol.iterations = iters_;
      return sol;
    }
    double infeas = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] >= n_struct_ + m_) infeas += std::max(val_[r], 0.0);
    }
    double scale = 1.0;
    for (int r = 0; r < lp_.num_demand_rows; ++r) scale = std::max(scale, std::abs(lp_.rhs[r]));
    if (infeas > tol_ * scale) {
      sol.status = LPStatus::INFEASIBLE;
      sol.iterations = iters_;
      return sol;
    }
    drive_out_artificials();
    if (!iterate(/*phase1=*/false)) {
      sol.status = LPStatus::ITERATION_LIMIT;
      sol.iterations = iters_;
      return sol;
    }
    extract(sol);
    return sol;
  }

 private:
  bool allowed_entering(int j) const {
    if (state_[j] == kBasic) return false;
    if (j >= n_struct_ + m_) return false;  // artificials never re-enter
    return true;
  }

  /// Returns false on iteration-limit exhaustion.
  bool iterate(bool phase1) {
    std::vector<double>& d = phase1 ? d1_ : d2_;
    int degen_streak = 0;
    bool bland = false;
    double z = 0.0;            // phase objective progress, tracked incrementally
    double z_at_bland = 0.0;   // progress level when Bland's rule engaged
    while (true) {
      if (iters_ >= max_iters_) return false;
      // Entering variable.
      int enter = -1;
      int dir = 0;
      double best = tol_;
      for (int j = 0; j < n_struct_ + m_; ++j) {
        if (!allowed_entering(j)) continue;
        double score = 0.0;
        int jdir = 0;
        if (state_[j] == kAtLower && d[j] > tol_) {
          score = d[j];
          jdir = +1;
        } else if (state_[j] == kAtUpper && d[j] < -tol_) {
          score = -d[j];
          jdir = -1;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          dir = jdir;
          best = score;
          break;
        }
        if (score > best) {
          best = score;
          enter = j;
          dir = jdir;
        }
      }
      if (enter < 0) return true;  // phase optimal

      ++iters_;
      const double* col = column(enter);
      // Ratio test: the entering variable moves by t >= 0 in direction dir.
      double t = ub_[enter] - lb_[enter];  // own-bound flip distance
      int leave_row = -1;
      bool leave_at_upper = false;
      for (int r = 0; r < m_; ++r) {
        const double coef = dir * col[static_cast<size_t>(r) * n_];
        const int bv = basis_[r];
        if (coef > kPivotTol) {
          const double room = val_[r] - lb_[bv];
          const double tr = room / coef;
          if (tr < t - 1e-12 ||
              (tr < t + 1e-12 && better_leaving(bv, r, leave_row, coef))) {
            t = std::min(t, std::max(tr, 0.0));
            leave_row = r;
            leave_at_upper = false;
          }
        } else if (coef < -kPivotTol && ub_[bv] < kInf) {
          const double room = ub_[bv] - val_[r];
          const double tr = room / (-coef);
          if (tr < t - 1e-12 ||
              (tr < t + 1e-12 && better_leaving(bv, r, leave_row, -coef))) {
            t = std::min(t, std::max(tr, 0.0));
            leave_row = r;
            leave_at_upper = true;
          }
        }
      }
      if (leave_row < 0 && !(t < kInf)) {
        // Unbounded ray; cannot happen for well-posed inputs, never silent.
        return false;
      }

      // Anti-cycling hysteresis: engage Bland's rule after a stretch of
      // stalled pivots and keep it until the objective makes real progress;
      // flipping back on perturbation-sized steps would loop on plateaus.
      const double dobj = best * t;
      if (!bland) {
        if (dobj <= 1e-9 * (1.0 + std::abs(z))) {
          if (++degen_streak > 150) {
            bland = true;
            z_at_bland = z;
          }
        } else {
          degen_streak = 0;
        }
      } else if (z + dobj - z_at_bland > 1e-6 * (1.0 + std::abs(z))) {
        bland = false;
        degen_streak = 0;
      }
      z += dobj;

      if (leave_row < 0) {
        // Bound flip: entering moves all the way to its other bound.
        apply_move(enter, dir, t, col);
        state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
        continue;
      }

      apply_move(enter, dir, t, col);
      const double enter_val = state_[enter] == kAtLower ? lb_[enter] + t : ub_[enter] - t;
      const int leaving = basis_[leave_row];
      state_[leaving] = leave_at_upper ? kAtUpper : kAtLower;
      pivot(leave_row, enter);
      basis_[leave_row] = enter;
      state_[enter] = kBasic;
      val_[leave_row] = enter_val;
    }
  }

  // Deterministic tie-breaking for the leaving variable: prefer artificials,
  // then the smaller variable index.
  bool better_leaving(int bv, int /*row*/, int current_row, double /*coef*/) const {
    if (current_row < 0) return true;
    const int cur = basis_[current_row];
    const bool bv_art = bv >= n_struct_ + m_;
    const bool cur_art = cur >= n_struct_ + m_;
    if (bv_art != cur_art) return bv_art;
    return bv < cur;
  }

  const double* column(int j) const { return &tab_[j]; }

  void apply_move(int /*enter*/, int dir, double t, const double* col) {
    if (t == 0.0) return;
    for (int r = 0; r < m_; ++r) {
      const double a = col[static_cast<size_t>(r) * n_];
      if (a != 0.0) val_[r] -= dir * t * a;
    }
  }

  void pivot(int lr, int pc) {
    double* prow = &tab_[static_cast<size_t>(lr) * n_];
    const double p = prow[pc];
    const double inv = 1.0 / p;
    for (int j = 0; j < n_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == lr) continue;
      double* row = &tab_[static_cast<size_t>(r) * n_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (int j = 0; j < n_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    eliminate_cost_row(d1_, prow, pc);
    eliminate_cost_row(d2_, prow, pc);
  }

  static void eliminate_cost_row(std::vector<double>& d, const double* prow, int pc) {
    const double f = d[pc];
    if (f == 0.0) return;
    const int n = static_cast<int>(d.size());
    for (int j = 0; j < n; ++j) d[j] -= f * prow[j];
    d[pc] = 0.0;
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_struct_ + m_) continue;
      const double* row = &tab_[static_cast<size_t>(r) * n_];
      int pc = -1;
      double best = kPivotTol;
      for (int j = 0; j < n_struct_ + m_; ++j) {
        if (state_[j] == kBasic) continue;
        if (std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          pc = j;
        }
      }
      if (pc < 0) continue;  // redundant row; artificial stays basic at 0
      const int art = basis_[r];
      pivot(r, pc);
      basis_[r] = pc;
      state_[pc] = kBasic;
      state_[art] = kAtLower;
      val_[r] = 0.0;
    }
  }

  void extract(LPSolution& sol) {
    sol.status = LPStatus::OPTIMAL;
    sol.iterations = iters_;
    sol.x.assign(n_struct_, 0.0);

    // Objective of the perturbed program: a valid upper bound on the exact
    // optimum (the perturbation only relaxes '<=' rows).
    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) {
      if (state_[j] == kAtUpper) obj += c2_[j];
    }
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_struct_) obj += c2_[basis_[r]] * val_[r];
    }
    sol.objective = obj;

    // Basic values with the perturbation removed: B^-1 e_r is the tableau
    // column of row r's slack.
    std::vector<double> corr(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      if (perturb_[r] == 0.0) continue;
      const int slack = n_struct_ + r;
      for (int i = 0; i < m_; ++i) {
        const double a = tab_[static_cast<size_t>(i) * n_ + slack];
        if (a != 0.0) corr[i] += perturb_[r] * a;
      }
    }
    std::vector<double> full(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == kAtUpper) full[j] = ub_[j];
    }
    for (int r = 0; r < m_; ++r) full[basis_[r]] = val_[r] - corr[r];
    for (int j = 0; j < n_struct_; ++j) {
      sol.x[j] = std::clamp(full[j], 0.0, 1.0);
    }

    // Primal feasibility audit against the original rows.
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      if (sol.x[j] == 0.0) continue;
      for (const auto& [row, a] : lp_.cols[j].entries) act[row] += a * sol.x[j];
    }
    double viol = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (r < lp_.num_demand_rows) {
        viol = std::max(viol, lp_.rhs[r] - act[r]);
      } else {
        viol = std::max(viol, act[r] - lp_.rhs[r]);
      }
    }
    sol.max_constraint_violation = std::max(viol, 0.0);

    // Row duals: y = c_B B^-1, and row r's slack column holds B^-1 (+-e_r)
    // (negative sign on '>=' rows, whose slack enters with -1).
    sol.row_duals.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const int slack = n_struct_ + r;
      double y = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = tab_[static_cast<size_t>(i) * n_ + slack];
        if (a != 0.0) y += c2_[basis_[i]] * a;
      }
      sol.row_duals[r] = r < lp_.num_demand_rows ? -y : y;
    }

    // Dual feasibility: recompute reduced costs from the final tableau.
    double worst = 0.0;
    for (int j = 0; j < n_struct_ + m_; ++j) {
      if (state_[j] == kBasic) continue;
      double d = c2_[j];
      for (int r = 0; r < m_; ++r) {
        const double a = tab_[static_cast<size_t>(r) * n_ + j];
        if (a != 0.0) d -= c2_[basis_[r]] * a;
      }
      if (state_[j] == kAtLower) worst = std::max(worst, d);
      if (state_[j] == kAtUpper) worst = std::max(worst, -d);
    }
    sol.max_reduced_cost = worst;
  }

  const LinearProgram& lp_;
  double tol_;
  long long max_iters_;
  int m_ = 0, n_struct_ = 0, n_art_ = 0, n_ = 0;
  std::vector<double> tab_, val_, lb_, ub_, c1_, c2_, d1_, d2_, perturb_;
  std::vector<uint8_t> state_;
  std::vector<int> basis_;
  long long iters_ = 0;
};

}  // namespace

LPSolution solve_lp(const LinearProgram& lp, double tol, long long max_iters) {
  for (double q : lp.rhs) {
    if (!std::isfinite(q)) throw std::invalid_argument("LP rhs must be finite");
  }
  Simplex s(lp, tol, max_iters);
  return s.run();
}

UtilityMatrix lp_utility(const Instance& inst, const LinearProgram& lp, const LPSolution& sol) {
  if (sol.status != LPStatus::OPTIMAL) {
    throw std::invalid_argument("lp_utility requires an OPTIMAL LP solution");
  }
  UtilityMatrix u = UtilityMatrix::zeros(UtilitySource::LP, inst.num_blocks(), inst.num_services());
  for (size_t j = 0; j < lp.cols.size(); ++j) {
    u.at(lp.cols[j].block, lp.cols[j].service) = sol.x[j];
  }
  return u;
}

void write_mps(const LinearProgram& lp, std::ostream& os) {
  os << "NAME          FLEXNR\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (int r = 0; r < lp.num_demand_rows; ++r) os << " G  D" << r << "\n";
  for (int r = 0; r < lp.num_unit_rows; ++r) os << " L  U" << r << "\n";
  os << "COLUMNS\n";
  char buf[128];
  for (size_t j = 0; j < lp.cols.size(); ++j) {
    const auto& col = lp.cols[j];
    const std::string name = "X" + std::to_string(j);
    if (col.obj != 0.0) {
      std::snprintf(buf, sizeof(buf), "    %-10s%-10s%.12g\n", name.c_str(), "OBJ", col.obj);
      os << buf;
    }
    for (const auto& [row, a] : col.entries) {
      const std::string rname = row < lp.num_demand_rows
                                    ? "D" + std::to_string(row)
                                    : "U" + std::to_string(row - lp.num_demand_rows);
      std::snprintf(buf, sizeof(buf), "    %-10s%-10s%.12g\n", name.c_str(), rname.c_str(), a);
      os << buf;
    }
  }
  os << "RHS\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    const std::string rname = r < lp.num_demand_rows
                                  ? "D" + std::to_string(r)
                                  : "U" + std::to_string(r - lp.num_demand_rows);
    std::snprintf(buf, sizeof(buf), "    %-10s%-10s%.12g\n", "RHS", rname.c_str(), lp.rhs[r]);
    os << buf;
  }
  os << "BOUNDS\n";
  for (size_t j = 0; j < lp.cols.size(); ++j) {
    std::snprintf(buf, sizeof(buf), " UP %-10s%-10s%.12g\n", "BND", ("X" + std::to_string(j)).c_str(), 1.0);
    os << buf;
  }
  os << "ENDATA\n";
}

}  // namespace flexnr
