#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fairflow {

// One linear constraint: sum(coef * var) cmp rhs, cmp in {'<', '=', '>'}
// meaning <=, ==, >=.
struct LinearRow {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  char cmp = '<';
  double rhs = 0.0;
};

}  // namespace fairflow
