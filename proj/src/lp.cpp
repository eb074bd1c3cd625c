#include "spb/lp.hpp"

#include "spb/polyalg.hpp"  // error types

#include <algorithm>
#include <cmath>
#include <limits>

namespace spb::lp {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kFeasTol = 1e-8;

class Simplex {
public:
  explicit Simplex(const Problem& p) : prob_(p) { build(); }

  Solution solve() {
    Solution sol;
    if (!run_phase1()) {
      sol.status = Status::Infeasible;
      sol.infeasibility = residual_;
      sol.phase1_duals = extract_duals(c1_);
      return sol;
    }
    cleanup_artificials();
    for (size_t j = 0; j < barred_.size(); ++j)
      if (is_artificial_[j]) barred_[j] = 1;
    recompute_zrow(c2_);
    if (!run(c2_)) {
      sol.status = Status::Unbounded;
      return sol;
    }
    sol.status = Status::Optimal;
    sol.x = extract_x();
    sol.objective = zrow_.back();
    sol.duals = extract_duals(c2_);
    return sol;
  }

  PhaseOneResult phase1_only() {
    PhaseOneResult r;
    r.feasible = run_phase1();
    r.residual = residual_;
    r.duals = extract_duals(c1_);
    if (r.feasible) r.x = extract_x();
    return r;
  }

private:
  const Problem& prob_;
  size_t nstruct_ = 0;
  size_t ncols_ = 0;                       // without rhs
  std::vector<std::vector<double>> T_;     // rows x (ncols_+1), rhs last
  std::vector<double> zrow_;               // ncols_+1
  std::vector<int> basis_;
  std::vector<char> barred_;
  std::vector<char> is_artificial_;
  std::vector<int> dualcol_;               // per original row; -1 if dropped
  std::vector<double> dualmult_;           // flip/scale back-transform
  std::vector<int> rowindex_;              // tableau row -> original row
  std::vector<double> c1_, c2_;
  double residual_ = 0.0;
  long degenerate_ = 0;
  bool bland_ = false;

  void build() {
    const size_t m = prob_.rows.size();
    nstruct_ = prob_.c.size();
    // count extra columns
    size_t extras = 0;
    for (const auto& r : prob_.rows) {
      RowSense s = r.sense;
      if (r.rhs < 0 && s != RowSense::EQ) s = (s == RowSense::LE) ? RowSense::GE : RowSense::LE;
      extras += (s == RowSense::LE) ? 1 : (s == RowSense::GE ? 2 : 1);
    }
    ncols_ = nstruct_ + extras;
    T_.assign(m, std::vector<double>(ncols_ + 1, 0.0));
    basis_.assign(m, -1);
    barred_.assign(ncols_, 0);
    is_artificial_.assign(ncols_, 0);
    dualcol_.assign(m, -1);
    dualmult_.assign(m, 1.0);
    rowindex_.resize(m);
    c1_.assign(ncols_, 0.0);
    c2_.assign(ncols_, 0.0);
    for (size_t j = 0; j < nstruct_; ++j) c2_[j] = prob_.c[j];

    size_t next = nstruct_;
    for (size_t i = 0; i < m; ++i) {
      rowindex_[i] = static_cast<int>(i);
      const Row& r = prob_.rows[i];
      if (r.a.size() != nstruct_) throw ValidationError("lp: row width mismatch");
      double flip = (r.rhs < 0.0) ? -1.0 : 1.0;
      RowSense s = r.sense;
      if (flip < 0 && s != RowSense::EQ) s = (s == RowSense::LE) ? RowSense::GE : RowSense::LE;
      double scale = 1.0;
      for (double v : r.a) scale = std::max(scale, std::abs(v));
      scale = std::max(scale, std::abs(r.rhs));
      double k = flip / scale;
      for (size_t j = 0; j < nstruct_; ++j) T_[i][j] = r.a[j] * k;
      T_[i][ncols_] = r.rhs * k;
      dualmult_[i] = k;
      if (s == RowSense::LE) {
        T_[i][next] = 1.0;
        basis_[i] = static_cast<int>(next);
        dualcol_[i] = static_cast<int>(next);
        ++next;
      } else if (s == RowSense::GE) {
        T_[i][next] = -1.0;  // surplus
        ++next;
        T_[i][next] = 1.0;  // artificial
        is_artificial_[next] = 1;
        c1_[next] = -1.0;
        basis_[i] = static_cast<int>(next);
        dualcol_[i] = static_cast<int>(next);
        ++next;
      } else {
        T_[i][next] = 1.0;  // artificial
        is_artificial_[next] = 1;
        c1_[next] = -1.0;
        basis_[i] = static_cast<int>(next);
        dualcol_[i] = static_cast<int>(next);
        ++next;
      }
    }
    zrow_.assign(ncols_ + 1, 0.0);
  }

  void recompute_zrow(const std::vector<double>& c) {
    for (size_t j = 0; j <= ncols_; ++j) {
      double z = 0.0;
      for (size_t i = 0; i < T_.size(); ++i) {
        double cb = c[static_cast<size_t>(basis_[i])];
        if (cb != 0.0) z += cb * T_[i][j];
      }
      zrow_[j] = z - (j < ncols_ ? c[j] : 0.0);
    }
  }

  void pivot(size_t r, size_t jc) {
    double piv = T_[r][jc];
    for (double& v : T_[r]) v /= piv;
    for (size_t i = 0; i < T_.size(); ++i) {
      if (i == r) continue;
      double f = T_[i][jc];
      if (f == 0.0) continue;
      for (size_t j = 0; j <= ncols_; ++j) T_[i][j] -= f * T_[r][j];
      T_[i][jc] = 0.0;
    }
    double f = zrow_[jc];
    if (f != 0.0) {
      for (size_t j = 0; j <= ncols_; ++j) zrow_[j] -= f * T_[r][j];
      zrow_[jc] = 0.0;
    }
    basis_[r] = static_cast<int>(jc);
  }

  // returns false on unbounded
  bool run(const std::vector<double>& /*c*/) {
    const long bland_after = 100 * static_cast<long>(ncols_);
    const long itcap = 20000 + 200 * static_cast<long>(ncols_);
    for (long it = 0; it < itcap; ++it) {
      int enter = -1;
      if (!bland_) {
        double best = -kPivTol;
        for (size_t j = 0; j < ncols_; ++j)
          if (!barred_[j] && zrow_[j] < best) {
            best = zrow_[j];
            enter = static_cast<int>(j);
          }
      } else {
        for (size_t j = 0; j < ncols_; ++j)
          if (!barred_[j] && zrow_[j] < -kPivTol) {
            enter = static_cast<int>(j);
            break;
          }
      }
      if (enter < 0) return true;  // optimal
      size_t je = static_cast<size_t>(enter);
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < T_.size(); ++i) {
        double a = T_[i][je];
        if (a <= kPivTol) continue;
        double ratio = T_[i][ncols_] / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 &&
             (leave < 0 || basis_[i] < basis_[static_cast<size_t>(leave)]))) {
          best_ratio = ratio;
          leave = static_cast<int>(i);
        }
      }
      if (leave < 0) return false;  // unbounded direction
      if (best_ratio < 1e-12 && ++degenerate_ > bland_after) bland_ = true;
      pivot(static_cast<size_t>(leave), je);
    }
    throw NumericError("lp: simplex iteration cap exceeded");
  }

  bool run_phase1() {
    recompute_zrow(c1_);
    bool need = false;
    for (char a : is_artificial_)
      if (a) need = true;
    if (need) {
      if (!run(c1_)) throw NumericError("lp: phase-1 unbounded");
    }
    double p1 = zrow_.back();  // = -sum of artificials (scaled rows)
    double unscaled = 0.0;
    for (size_t i = 0; i < T_.size(); ++i) {
      int b = basis_[i];
      if (b >= 0 && is_artificial_[static_cast<size_t>(b)])
        unscaled += std::max(0.0, T_[i][ncols_]) / std::abs(dualmult_[i]);
    }
    residual_ = unscaled;
    return std::max(0.0, -p1) <= kFeasTol;
  }

  void cleanup_artificials() {
    // pivot basic artificials out; drop rows that prove redundant
    for (size_t i = 0; i < T_.size();) {
      size_t b = static_cast<size_t>(basis_[i]);
      if (!is_artificial_[b]) {
        ++i;
        continue;
      }
      int jc = -1;
      for (size_t j = 0; j < ncols_; ++j) {
        if (is_artificial_[j] || barred_[j]) continue;
        if (std::abs(T_[i][j]) > 1e-7) {
          jc = static_cast<int>(j);
          break;
        }
      }
      if (jc >= 0) {
        pivot(i, static_cast<size_t>(jc));
        ++i;
      } else {
        dualcol_[static_cast<size_t>(rowindex_[i])] = -1;
        T_.erase(T_.begin() + static_cast<long>(i));
        basis_.erase(basis_.begin() + static_cast<long>(i));
        rowindex_.erase(rowindex_.begin() + static_cast<long>(i));
      }
    }
  }

  std::vector<double> extract_x() const {
    std::vector<double> x(nstruct_, 0.0);
    for (size_t i = 0; i < T_.size(); ++i) {
      size_t b = static_cast<size_t>(basis_[i]);
      if (b < nstruct_) x[b] = T_[i][ncols_];
    }
    return x;
  }

  std::vector<double> extract_duals(const std::vector<double>& c) const {
    std::vector<double> y(prob_.rows.size(), 0.0);
    for (size_t i = 0; i < prob_.rows.size(); ++i) {
      int dc = dualcol_[i];
      if (dc < 0) continue;  // redundant row, dual 0
      double raw = zrow_[static_cast<size_t>(dc)] + c[static_cast<size_t>(dc)];
      y[i] = raw * dualmult_[i];
    }
    return y;
  }
};

}  // namespace

Solution solve_lp(const Problem& p) {
  if (p.rows.empty()) {
    Solution s;
    for (double cj : p.c)
      if (cj > 0) {
        s.status = Status::Unbounded;
        return s;
      }
    s.status = Status::Optimal;
    s.x.assign(p.c.size(), 0.0);
    return s;
  }
  return Simplex(p).solve();
}

PhaseOneResult phase_one(const Problem& p) {
  if (p.rows.empty()) {
    PhaseOneResult r;
    r.feasible = true;
    r.x.assign(p.c.size(), 0.0);
    return r;
  }
  return Simplex(p).phase1_only();
}

}  // namespace spb::lp
