#pragma once

#include <span>
#include <vector>

namespace hypercell::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };
enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Small dense linear program: maximize <c, x> subject to row constraints.
///
/// Variables are nonnegative unless marked free. Solved by a two-phase
/// tableau simplex with Bland's pivoting rule, so the returned vertex is a
/// deterministic function of the input. Intended for problems with a handful
/// of variables and at most a few hundred rows.
class Problem {
 public:
  explicit Problem(int num_vars);

  int num_vars() const { return num_vars_; }

  void set_free(int var);
  void set_objective(std::span<const double> c);
  void add_constraint(std::span<const double> coeffs, Sense sense, double rhs);

  Result maximize() const;

 private:
  struct Row {
    std::vector<double> coeffs;
    Sense sense;
    double rhs;
  };

  int num_vars_;
  std::vector<bool> free_;
  std::vector<double> objective_;
  std::vector<Row> rows_;
};

}  // namespace hypercell::lp
