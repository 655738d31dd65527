#include "acorn/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "acorn/errors.hpp"

namespace acorn::csv {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      // Drop a UTF-8 byte order mark.
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      t.header = split_line(line);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
  }
  if (!have_header) throw DataError(path.string() + ": empty file");
  return t;
}

std::string format(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, bool& ok) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  ok = !s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size();
  return v;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* header) {
  Table t = read(path);
  const std::size_t cols = t.header.size();
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != cols) {
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + ": expected " +
                      std::to_string(cols) + " fields, got " + std::to_string(t.rows[i].size()));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      bool ok = false;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(t.rows[i][j], ok);
      if (!ok) {
        throw DataError(path.string() + ": row " + std::to_string(i + 1) + ": column " +
                        t.header[j] + ": not a number");
      }
    }
  }
  if (header) *header = std::move(t.header);
  return m;
}

}  // namespace acorn::csv
