#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "hdmds/errors.hpp"

namespace hdmds {

// A multivariate time-series panel: n rows (time points) by p columns
// (component series). Immutable after construction; all entries finite.
struct Panel {
  Eigen::MatrixXd data;

  Eigen::Index n() const { return data.rows(); }
  Eigen::Index p() const { return data.cols(); }
};

namespace detail {

// Full-string numeric parse; rejects trailing junk and empty cells.
inline bool parse_cell(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + cell.size();
}

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

// Parses comma-separated numeric text, one row per time point. A single
// header row is skipped when the first row contains any non-numeric cell.
// Rows and columns are reported 1-based in error messages.
inline Panel load_panel(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_row = true;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto cells = detail::split_row(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!detail::parse_cell(cells[c], values[c])) {
        numeric = false;
        bad_col = c + 1;
        break;
      }
    }

    if (first_content_row) {
      first_content_row = false;
      if (!numeric) continue;  // header row
      width = cells.size();
    } else if (!numeric) {
      throw data_error("non-numeric cell at row " + std::to_string(line_no) +
                       ", column " + std::to_string(bad_col));
    }

    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw data_error("ragged row " + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " cells, got " +
                       std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!std::isfinite(values[c])) {
        throw data_error("non-finite cell at row " + std::to_string(line_no) +
                         ", column " + std::to_string(c + 1));
      }
    }
    rows.push_back(std::move(values));
  }

  if (rows.size() < 2) {
    throw data_error("panel needs at least 2 data rows, got " +
                     std::to_string(rows.size()));
  }

  Panel panel;
  panel.data.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      panel.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return panel;
}

inline Panel load_panel(const std::string& csv_text) {
  std::istringstream in(csv_text);
  return load_panel(in);
}

inline Panel load_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open panel file: " + path);
  return load_panel(in);
}

inline Eigen::VectorXd column_means(const Panel& panel) {
  return panel.data.colwise().mean();
}

}  // namespace hdmds
