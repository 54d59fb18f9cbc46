#include "satflow/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace satflow::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string optional_cell(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::filesystem::path& path, int line) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

void write_snapshot_csv(const std::filesystem::path& path, const CellIndexSet& cells, const Eigen::VectorXd& p) {
  if (p.size() != cells.size()) throw IoError("snapshot vector does not match the grid");
  std::ofstream out = open_out(path);
  const int d = cells.dimension();
  for (int k = 0; k < d; ++k) out << 'i' << k + 1 << ',';
  for (int k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
  out << "density\n";
  for (int pos = 0; pos < cells.size(); ++pos) {
    const MultiIndex& i = cells.index(pos);
    const Point x = cells.center(pos);
    for (int k = 0; k < d; ++k) out << i[k] << ',';
    for (int k = 0; k < d; ++k) out << format_double(x[k]) << ',';
    out << format_double(p[pos]) << '\n';
  }
}

FieldRows read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  const std::vector<std::string> header = split(line);
  const int columns = static_cast<int>(header.size());
  if (columns < 3 || (columns - 1) % 2 != 0 || header.back() != "density") {
    throw IoError(path.string() + ": header must be i1..id, x1..xd, density");
  }
  FieldRows rows;
  rows.dimension = (columns - 1) / 2;
  if (rows.dimension > kMaxDim) throw IoError(path.string() + ": too many axes");
  for (int k = 0; k < rows.dimension; ++k) {
    if (header[k] != "i" + std::to_string(k + 1) || header[rows.dimension + k] != "x" + std::to_string(k + 1)) {
      throw IoError(path.string() + ": unexpected column '" + header[k] + "'");
    }
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (static_cast<int>(cells.size()) != columns) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                    " fields");
    }
    MultiIndex idx{};
    for (int k = 0; k < rows.dimension; ++k) idx[k] = parse_number<int>(cells[k], path, lineno);
    rows.indices.push_back(idx);
    rows.density.push_back(parse_number<double>(cells.back(), path, lineno));
  }
  return rows;
}

Eigen::VectorXd field_on_grid(const FieldRows& rows, const CellIndexSet& cells) {
  if (rows.dimension != cells.dimension()) {
    throw IoError("field has dimension " + std::to_string(rows.dimension) + " but the grid has " +
                  std::to_string(cells.dimension()));
  }
  if (static_cast<int>(rows.indices.size()) != cells.size()) {
    throw IoError("field has " + std::to_string(rows.indices.size()) + " rows but the grid has " +
                  std::to_string(cells.size()) + " cells");
  }
  Eigen::VectorXd p = Eigen::VectorXd::Constant(cells.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < rows.indices.size(); ++r) {
    const auto pos = cells.find(rows.indices[r]);
    if (!pos) throw IoError("field row " + std::to_string(r + 1) + " is not an admissible cell of the grid");
    p[*pos] = rows.density[r];
  }
  if (p.hasNaN()) throw IoError("field repeats a cell");
  return p;
}

const std::vector<std::string> kDiagnosticsColumns = {
    "step",          "time",          "mass",           "free_energy",       "dissipation_lhs",
    "energy_drop",   "min_density",   "max_density",    "h1_seminorm_dU",    "lambda_entropy",
    "newton_iterations", "picard_iterations", "residual_norm"};

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < kDiagnosticsColumns.size(); ++c) out << (c ? "," : "") << kDiagnosticsColumns[c];
  out << '\n';
  for (const DiagnosticsRecord& r : records) {
    out << r.step << ',' << format_double(r.time) << ',' << format_double(r.mass) << ','
        << format_double(r.free_energy) << ',' << format_double(r.dissipation_lhs) << ','
        << format_double(r.energy_drop) << ',' << format_double(r.min_density) << ','
        << format_double(r.max_density) << ',' << format_double(r.h1_seminorm_dU) << ','
        << optional_cell(r.lambda_entropy) << ',' << r.newton_iterations << ',' << r.picard_iterations << ','
        << format_double(r.residual_norm) << '\n';
  }
}

const std::vector<std::string> kErrorColumns = {"h", "tau", "eps1", "eps2", "rate"};

void write_errors_csv(const std::filesystem::path& path, const std::vector<ErrorRow>& rows) {
  std::ofstream out = open_out(path);
  out << "h,tau,eps1,eps2,rate\n";
  for (const ErrorRow& r : rows) {
    out << format_double(r.h) << ',' << format_double(r.tau) << ',' << optional_cell(r.eps1) << ','
        << optional_cell(r.eps2) << ',' << optional_cell(r.rate) << '\n';
  }
}

}  // namespace satflow::io
