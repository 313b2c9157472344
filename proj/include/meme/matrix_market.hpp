#ifndef MEME_MATRIX_MARKET_HPP
#define MEME_MATRIX_MARKET_HPP

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "meme/error.hpp"
#include "meme/symmetric_operator.hpp"

namespace meme {

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Next line that is neither blank nor a '%' comment.
inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace detail

/// Reads a real (or integer/pattern) Matrix Market file in coordinate or
/// array format with a "symmetric" or "general" header. General matrices
/// are accepted only if every stored pair satisfies K_ij == K_ji exactly.
/// Coordinate input ends up in CSR storage, array input in dense storage.
inline SymmetricOperator read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("matrix market: empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw Error("matrix market: missing %%MatrixMarket banner");
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix") throw Error("matrix market: unsupported object '" + object + "'");
  if (format != "coordinate" && format != "array")
    throw Error("matrix market: unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double" && field != "pattern")
    throw Error("matrix market: unsupported field '" + field + "'");
  if (symmetry != "symmetric" && symmetry != "general")
    throw Error("matrix market: unsupported symmetry '" + symmetry + "'");
  if (format == "array" && field == "pattern")
    throw Error("matrix market: pattern field requires coordinate format");
  const bool symmetric = symmetry == "symmetric";

  if (!detail::next_data_line(in, line)) throw Error("matrix market: missing size line");
  std::istringstream size_line(line);
  long long rows = 0, cols = 0, nnz = 0;
  size_line >> rows >> cols;
  if (format == "coordinate") size_line >> nnz;
  if (!size_line || rows <= 0 || cols <= 0 || nnz < 0) throw Error("matrix market: bad size line");
  if (rows != cols) throw Error("matrix market: matrix is not square");
  const Eigen::Index n = static_cast<Eigen::Index>(rows);

  if (format == "coordinate") {
    std::vector<MatrixEntry> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
      if (!detail::next_data_line(in, line)) throw Error("matrix market: truncated entry list");
      std::istringstream entry(line);
      long long i = 0, j = 0;
      double v = 1.0;
      entry >> i >> j;
      if (field != "pattern") entry >> v;
      if (!entry) throw Error("matrix market: malformed entry '" + line + "'");
      if (i < 1 || i > rows || j < 1 || j > cols) throw Error("matrix market: index out of range");
      entries.push_back({static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1), v});
    }
    return SymmetricOperator::from_entries(n, entries, symmetric);
  }

  // Array format: column-major; symmetric files list the lower triangle.
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = symmetric ? j : 0; i < n; ++i) {
      if (!detail::next_data_line(in, line)) throw Error("matrix market: truncated array");
      std::istringstream value(line);
      double v = 0.0;
      if (!(value >> v)) throw Error("matrix market: malformed value '" + line + "'");
      dense(i, j) = v;
      if (symmetric) dense(j, i) = v;
    }
  return SymmetricOperator::from_dense(std::move(dense));
}

inline SymmetricOperator read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file '" + path + "'");
  return read_matrix_market(in);
}

/// Writes the lower triangle in "coordinate real symmetric" form.
inline void write_matrix_market(std::ostream& out, const SymmetricOperator& op) {
  const Eigen::MatrixXd k = op.to_dense();
  std::vector<MatrixEntry> lower;
  for (Eigen::Index j = 0; j < k.cols(); ++j)
    for (Eigen::Index i = j; i < k.rows(); ++i)
      if (k(i, j) != 0.0) lower.push_back({i, j, k(i, j)});
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << k.rows() << ' ' << k.cols() << ' ' << lower.size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : lower) out << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
}

}  // namespace meme

#endif  // MEME_MATRIX_MARKET_HPP
