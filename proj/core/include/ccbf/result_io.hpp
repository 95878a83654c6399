#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccbf/collab.hpp"
#include "ccbf/errors.hpp"
#include "ccbf/simulate.hpp"

namespace ccbf {

/// A result file that does not follow the column layout.
class ResultFormatError : public Error {
 public:
  using Error::Error;
};

/// Column names for an n-node result:
/// t, x_1..x_n, u_1..u_n, cbar_1..cbar_n, outer_rounds, inner_rounds, viol_1..viol_n.
std::vector<std::string> result_columns(std::size_t nodes);

/// Scalar-state, scalar-control results only. Floats use 17 significant digits.
void write_result_csv(std::ostream& out, const ScenarioResult& result);

std::string message_csv_header();
std::string message_csv_row(double time, int sub_round, const CollabMessage& m);

/// A result file read back as numbers.
struct ResultTable {
  std::size_t nodes = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws ResultFormatError.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Throws ResultFormatError naming the offending column or row.
ResultTable read_result_csv(std::istream& in);

}  // namespace ccbf
