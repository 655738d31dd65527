#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "acorn/matrix.hpp"

namespace acorn::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma separated, first line is the header, double quotes escape commas.
// Rows keep whatever arity they have; callers validate it.
Table read(const std::filesystem::path& path);
std::vector<std::string> split_line(std::string_view line);

// Shortest representation that parses back to the same double.
std::string format(double v);
double parse_double(std::string_view s, bool& ok);

void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::string>& header);
Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

}  // namespace acorn::csv
