#pragma once

#include <vector>

#include "causord/rational.hpp"

namespace causord::linprog {

enum class Rel { Eq, Le, Ge };

struct Row {
  std::vector<Rational> a;
  Rel rel;
  Rational b;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  Rational objective;        // set when Optimal
  std::vector<Rational> x;   // primal solution when Optimal
  // Set when Infeasible: one multiplier per input row such that
  //   y_i >= 0 for Le rows, y_i <= 0 for Ge rows, y_i free for Eq rows,
  //   sum_i y_i * a_i >= 0 componentwise, and sum_i y_i * b_i < 0.
  // Any x >= 0 satisfying the rows would give
  //   0 <= (sum_i y_i a_i) . x <= sum_i y_i b_i < 0, a contradiction.
  std::vector<Rational> farkas;
};

// maximize c.x subject to the rows and x >= 0, in exact rational
// arithmetic. Two-phase dense simplex with Bland's rule (no cycling),
// deterministic pivot sequence.
Result maximize(const std::vector<Rational>& c, const std::vector<Row>& rows);

// minimize c.x: maximize(-c), objective negated back.
Result minimize(const std::vector<Rational>& c, const std::vector<Row>& rows);

}  // namespace causord::linprog
