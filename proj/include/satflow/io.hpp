#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satflow/diagnostics.hpp"
#include "satflow/grid.hpp"

namespace satflow::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Round-trip exact decimal form (17 significant digits, '.' separator, locale independent).
std::string format_double(double x);

/// Header: i1..id, x1..xd, density. One row per admissible cell in dense order.
void write_snapshot_csv(const std::filesystem::path& path, const CellIndexSet& cells, const Eigen::VectorXd& p);

struct FieldRows {
  int dimension = 0;
  std::vector<MultiIndex> indices;
  std::vector<double> density;
};
FieldRows read_snapshot_csv(const std::filesystem::path& path);

/// Reorders rows onto the grid. Throws when the set of indices differs from the grid's.
Eigen::VectorXd field_on_grid(const FieldRows& rows, const CellIndexSet& cells);

extern const std::vector<std::string> kDiagnosticsColumns;
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

struct ErrorRow {
  double h = 0.0;
  double tau = 0.0;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<double> rate;
};
extern const std::vector<std::string> kErrorColumns;
void write_errors_csv(const std::filesystem::path& path, const std::vector<ErrorRow>& rows);

}  // namespace satflow::io
