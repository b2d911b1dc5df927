#include "hypercell/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypercell::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-12;
constexpr int kMaxIterations = 100000;

class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows, -1) {}

  double& at(int r, int c) { return data_[r * (cols_ + 1) + c]; }
  double at(int r, int c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  double rhs(int r) const { return at(r, cols_); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  void drop_row(int r) {
    data_.erase(data_.begin() + r * (cols_ + 1), data_.begin() + (r + 1) * (cols_ + 1));
    basis_.erase(basis_.begin() + r);
    --rows_;
  }

  // Maximizes <cost, x> over columns where allowed[c] is true. `partner[c]`
  // is the mirrored column of a split free variable (or -1). Returns false
  // when unbounded.
  bool run(const std::vector<double>& cost, std::vector<bool> allowed, const std::vector<int>& partner) {
    double cost_scale = 1.0;
    for (double v : cost) cost_scale = std::max(cost_scale, std::abs(v));
    std::vector<bool> basic(cols_, false);
    for (int it = 0; it < kMaxIterations; ++it) {
      std::fill(basic.begin(), basic.end(), false);
      for (int b : basis_) basic[b] = true;
      int enter = -1;
      double enter_reduced = 0.0;
      for (int c = 0; c < cols_ && enter < 0; ++c) {
        if (!allowed[c] || basic[c]) continue;
        // The mirror of a basic column has reduced cost exactly zero; rounding
        // would otherwise let it enter along a direction that moves nothing.
        if (partner[c] >= 0 && basic[partner[c]]) continue;
        double reduced = cost[c];
        for (int r = 0; r < rows_; ++r) reduced -= cost[basis_[r]] * at(r, c);
        if (reduced > kCostEps * cost_scale) {
          enter = c;
          enter_reduced = reduced;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double best = 0.0;
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = rhs(r) / a;
        if (leave < 0 || ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis_[r] < basis_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) {
        // A ray with a reduced cost at rounding level is noise, not a true
        // unbounded direction.
        if (enter_reduced <= 1e-9 * cost_scale) {
          allowed[enter] = false;
          continue;
        }
        return false;
      }
      pivot(leave, enter);
    }
    throw std::runtime_error("lp: iteration limit reached");
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
  std::vector<int> basis_;
};

}  // namespace

Problem::Problem(int num_vars)
    : num_vars_(num_vars), free_(num_vars, false), objective_(num_vars, 0.0) {}

void Problem::set_free(int var) { free_.at(var) = true; }

void Problem::set_objective(std::span<const double> c) {
  if (static_cast<int>(c.size()) != num_vars_) throw std::invalid_argument("lp: objective size mismatch");
  objective_.assign(c.begin(), c.end());
}

void Problem::add_constraint(std::span<const double> coeffs, Sense sense, double rhs) {
  if (static_cast<int>(coeffs.size()) != num_vars_) throw std::invalid_argument("lp: constraint size mismatch");
  rows_.push_back({std::vector<double>(coeffs.begin(), coeffs.end()), sense, rhs});
}

Result Problem::maximize() const {
  // Column layout: structural columns (free variables split into +/- parts),
  // then one slack or surplus column per inequality, then artificials.
  std::vector<int> pos_col(num_vars_), neg_col(num_vars_, -1);
  int cols = 0;
  for (int j = 0; j < num_vars_; ++j) {
    pos_col[j] = cols++;
    if (free_[j]) neg_col[j] = cols++;
  }
  const int m = static_cast<int>(rows_.size());

  std::vector<Sense> senses(m);
  std::vector<double> sign(m);
  for (int i = 0; i < m; ++i) {
    sign[i] = rows_[i].rhs < 0.0 ? -1.0 : 1.0;
    Sense s = rows_[i].sense;
    if (sign[i] < 0.0 && s != Sense::Equal) s = (s == Sense::LessEqual) ? Sense::GreaterEqual : Sense::LessEqual;
    senses[i] = s;
  }
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  for (int i = 0; i < m; ++i)
    if (senses[i] != Sense::Equal) slack_col[i] = cols++;
  const int first_artificial = cols;
  for (int i = 0; i < m; ++i)
    if (senses[i] != Sense::LessEqual) art_col[i] = cols++;

  std::vector<int> partner(cols, -1);
  for (int j = 0; j < num_vars_; ++j) {
    if (neg_col[j] < 0) continue;
    partner[pos_col[j]] = neg_col[j];
    partner[neg_col[j]] = pos_col[j];
  }

  Tableau t(m, cols);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < num_vars_; ++j) {
      const double a = sign[i] * rows_[i].coeffs[j];
      t.at(i, pos_col[j]) = a;
      if (neg_col[j] >= 0) t.at(i, neg_col[j]) = -a;
    }
    t.rhs(i) = sign[i] * rows_[i].rhs;
    if (slack_col[i] >= 0) t.at(i, slack_col[i]) = (senses[i] == Sense::LessEqual) ? 1.0 : -1.0;
    if (art_col[i] >= 0) {
      t.at(i, art_col[i]) = 1.0;
      t.basis()[i] = art_col[i];
    } else {
      t.basis()[i] = slack_col[i];
    }
  }

  Result result;
  std::vector<bool> allowed(cols, true);
  if (first_artificial < cols) {
    std::vector<double> phase1(cols, 0.0);
    for (int c = first_artificial; c < cols; ++c) phase1[c] = -1.0;
    t.run(phase1, allowed, partner);
    double infeasibility = 0.0, scale = 1.0;
    for (int i = 0; i < t.rows(); ++i) {
      scale = std::max(scale, std::abs(t.rhs(i)));
      if (t.basis()[i] >= first_artificial) infeasibility += t.rhs(i);
    }
    for (const auto& row : rows_) scale = std::max(scale, std::abs(row.rhs));
    if (infeasibility > 1e-9 * scale) {
      result.status = Status::Infeasible;
      return result;
    }
    // Drive remaining zero-level artificials out of the basis.
    for (int i = t.rows() - 1; i >= 0; --i) {
      if (t.basis()[i] < first_artificial) continue;
      int col = -1;
      for (int c = 0; c < first_artificial; ++c) {
        if (std::abs(t.at(i, c)) > kPivotEps) {
          col = c;
          break;
        }
      }
      if (col >= 0)
        t.pivot(i, col);
      else
        t.drop_row(i);
    }
    for (int c = first_artificial; c < cols; ++c) allowed[c] = false;
  }

  std::vector<double> cost(cols, 0.0);
  for (int j = 0; j < num_vars_; ++j) {
    cost[pos_col[j]] = objective_[j];
    if (neg_col[j] >= 0) cost[neg_col[j]] = -objective_[j];
  }
  if (!t.run(cost, allowed, partner)) {
    result.status = Status::Unbounded;
    return result;
  }

  std::vector<double> value(cols, 0.0);
  for (int i = 0; i < t.rows(); ++i) value[t.basis()[i]] = t.rhs(i);
  result.status = Status::Optimal;
  result.x.resize(num_vars_);
  result.objective = 0.0;
  for (int j = 0; j < num_vars_; ++j) {
    result.x[j] = value[pos_col[j]] - (neg_col[j] >= 0 ? value[neg_col[j]] : 0.0);
    result.objective += objective_[j] * result.x[j];
  }
  return result;
}

}  // namespace hypercell::lp
