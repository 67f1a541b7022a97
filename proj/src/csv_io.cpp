#include "rieszdr/csv_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace rieszdr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    std::size_t b = cell.find_first_not_of(" \t\r");
    std::size_t e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& col) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw SchemaMismatch("line " + std::to_string(line_no) + ": cannot parse '" + cell +
                         "' in column '" + col + "'");
  }
  return v;
}

struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

ParsedCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  ParsedCsv out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_line(line);
    if (out.header.empty()) {
      out.header = std::move(cells);
      continue;
    }
    if (cells.size() != out.header.size()) {
      throw SchemaMismatch("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(out.header.size()) + " cells, got " +
                           std::to_string(cells.size()));
    }
    out.rows.push_back(std::move(cells));
  }
  if (out.header.empty()) throw SchemaMismatch("'" + path + "' has no header row");
  return out;
}

// Covariate columns must be exactly x1..xd for some d >= 1.
std::vector<std::size_t> covariate_columns(const std::vector<std::string>& header,
                                           const std::string& path) {
  std::vector<std::pair<int, std::size_t>> indexed;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& h = header[j];
    if (h.size() >= 2 && h[0] == 'x' &&
        std::all_of(h.begin() + 1, h.end(), [](char c) { return std::isdigit(c) != 0; })) {
      indexed.emplace_back(std::stoi(h.substr(1)), j);
    }
  }
  if (indexed.empty()) throw SchemaMismatch("'" + path + "' has no covariate columns x1..xd");
  std::sort(indexed.begin(), indexed.end());
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < indexed.size(); ++k) {
    if (indexed[k].first != static_cast<int>(k) + 1) {
      throw SchemaMismatch("covariate columns must be consecutive x1..xd");
    }
    cols.push_back(indexed[k].second);
  }
  return cols;
}

std::size_t require_column(const std::vector<std::string>& header, const std::string& name,
                           const std::string& path) {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw SchemaMismatch("'" + path + "' is missing column '" + name + "'");
}

void format_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

ObservationalDataset read_observational_csv(const std::string& path) {
  ParsedCsv csv = read_csv(path);
  auto xcols = covariate_columns(csv.header, path);
  std::size_t dcol = require_column(csv.header, "d", path);
  std::size_t ycol = require_column(csv.header, "y", path);

  const Eigen::Index n = static_cast<Eigen::Index>(csv.rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(xcols.size()));
  Eigen::VectorXd d(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < xcols.size(); ++j) {
      x(i, static_cast<Eigen::Index>(j)) =
          parse_number(row[xcols[j]], static_cast<std::size_t>(i) + 2, csv.header[xcols[j]]);
    }
    d(i) = parse_number(row[dcol], static_cast<std::size_t>(i) + 2, "d");
    y(i) = parse_number(row[ycol], static_cast<std::size_t>(i) + 2, "y");
  }
  return validate_observational(x, d, y);
}

void write_observational_csv(const std::string& path, const ObservationalDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  std::string line;
  for (Eigen::Index j = 0; j < data.dim(); ++j) line += "x" + std::to_string(j + 1) + ",";
  line += "d,y\n";
  out << line;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      format_number(line, data.x()(i, j));
      line += ',';
    }
    line += data.d()(i) == 1.0 ? "1," : "0,";
    format_number(line, data.y()(i));
    line += '\n';
    out << line;
  }
}

TwoSampleDataset read_two_sample_csv(const std::string& path) {
  ParsedCsv csv = read_csv(path);
  auto xcols = covariate_columns(csv.header, path);
  std::size_t scol = require_column(csv.header, "sample", path);

  std::vector<Eigen::VectorXd> de_rows, nu_rows;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    Eigen::VectorXd x(static_cast<Eigen::Index>(xcols.size()));
    for (std::size_t j = 0; j < xcols.size(); ++j) {
      x(static_cast<Eigen::Index>(j)) = parse_number(row[xcols[j]], i + 2, csv.header[xcols[j]]);
    }
    const std::string& label = row[scol];
    if (label == "de") {
      de_rows.push_back(std::move(x));
    } else if (label == "nu") {
      nu_rows.push_back(std::move(x));
    } else {
      throw SchemaMismatch("line " + std::to_string(i + 2) + ": sample label must be de or nu, got '" +
                           label + "'");
    }
  }
  if (de_rows.empty() || nu_rows.empty()) {
    throw DataError("'" + path + "' must contain both de and nu rows");
  }
  Eigen::MatrixXd de(static_cast<Eigen::Index>(de_rows.size()), de_rows[0].size());
  Eigen::MatrixXd nu(static_cast<Eigen::Index>(nu_rows.size()), nu_rows[0].size());
  for (std::size_t i = 0; i < de_rows.size(); ++i) de.row(static_cast<Eigen::Index>(i)) = de_rows[i];
  for (std::size_t i = 0; i < nu_rows.size(); ++i) nu.row(static_cast<Eigen::Index>(i)) = nu_rows[i];
  return TwoSampleDataset(std::move(de), std::move(nu));
}

void write_two_sample_csv(const std::string& path, const TwoSampleDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  std::string line;
  for (Eigen::Index j = 0; j < data.dim(); ++j) line += "x" + std::to_string(j + 1) + ",";
  line += "sample\n";
  out << line;
  auto emit = [&](const Eigen::MatrixXd& m, const char* label) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      line.clear();
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        format_number(line, m(i, j));
        line += ',';
      }
      line += label;
      line += '\n';
      out << line;
    }
  };
  emit(data.de(), "de");
  emit(data.nu(), "nu");
}

}  // namespace rieszdr
