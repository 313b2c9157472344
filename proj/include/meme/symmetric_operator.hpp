#ifndef MEME_SYMMETRIC_OPERATOR_HPP
#define MEME_SYMMETRIC_OPERATOR_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "meme/error.hpp"

namespace meme {

/// One stored entry (0-based indices).
struct MatrixEntry {
  Eigen::Index row;
  Eigen::Index col;
  double value;
};

/// Square symmetric matrix, dense or CSR, exposing only what the estimators
/// need: matrix-vector products and absolute row sums.
class SymmetricOperator {
 public:
  using Dense = Eigen::MatrixXd;
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  /// Takes a dense matrix; rejects non-square or non-symmetric input
  /// (exact comparison).
  static SymmetricOperator from_dense(Dense m) {
    if (m.rows() != m.cols()) throw Error("operator must be square");
    if (m.rows() < 1) throw Error("operator must have n >= 1");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = j + 1; i < m.rows(); ++i)
        if (m(i, j) != m(j, i)) throw Error("operator is not symmetric");
    return SymmetricOperator(std::move(m));
  }

  /// Builds CSR storage from triplets. With mirror_lower=true the entries are
  /// one triangle of a symmetric matrix and are reflected (diagonal kept once);
  /// otherwise both triangles must be present and agree exactly. Duplicate
  /// coordinates are summed.
  static SymmetricOperator from_entries(Eigen::Index n, const std::vector<MatrixEntry>& entries,
                                        bool mirror_lower) {
    if (n < 1) throw Error("operator must have n >= 1");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(entries.size() * (mirror_lower ? 2 : 1));
    for (const auto& e : entries) {
      if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
        throw Error("matrix entry index out of range");
      triplets.emplace_back(e.row, e.col, e.value);
      if (mirror_lower && e.row != e.col) triplets.emplace_back(e.col, e.row, e.value);
    }
    Sparse s(n, n);
    s.setFromTriplets(triplets.begin(), triplets.end());
    s.makeCompressed();
    if (!mirror_lower) {
      const Sparse t = s.transpose();
      Sparse diff = s - t;
      diff.prune(0.0, 0.0);
      if (diff.nonZeros() != 0) throw Error("operator is not symmetric");
    }
    return SymmetricOperator(std::move(s));
  }

  Eigen::Index size() const {
    return std::visit([](const auto& m) { return m.rows(); }, storage_);
  }

  bool is_sparse() const { return std::holds_alternative<Sparse>(storage_); }

  /// Stored values (n*n for dense storage).
  Eigen::Index nonzeros() const {
    if (const auto* s = std::get_if<Sparse>(&storage_)) return s->nonZeros();
    return size() * size();
  }

  /// out = K * in
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    if (in.size() != size()) throw Error("vector length does not match operator dimension");
    std::visit([&](const auto& m) { out.noalias() = m * in; }, storage_);
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& in) const {
    Eigen::VectorXd out(size());
    apply(in, out);
    return out;
  }

  /// sum_j |K_ij| for every row.
  Eigen::VectorXd row_abs_sums() const {
    if (const auto* s = std::get_if<Sparse>(&storage_)) {
      Eigen::VectorXd sums = Eigen::VectorXd::Zero(s->rows());
      for (Eigen::Index r = 0; r < s->outerSize(); ++r)
        for (Sparse::InnerIterator it(*s, r); it; ++it) sums(r) += std::abs(it.value());
      return sums;
    }
    return std::get<Dense>(storage_).cwiseAbs().rowwise().sum();
  }

  /// c * K with the same storage kind.
  SymmetricOperator scaled(double c) const {
    return std::visit(
        [c](const auto& m) {
          using Storage = std::decay_t<decltype(m)>;
          return SymmetricOperator(Storage(c * m));
        },
        storage_);
  }

  Dense to_dense() const {
    if (const auto* s = std::get_if<Sparse>(&storage_)) return Dense(*s);
    return std::get<Dense>(storage_);
  }

  const Dense* dense() const { return std::get_if<Dense>(&storage_); }
  const Sparse* sparse() const { return std::get_if<Sparse>(&storage_); }

 private:
  explicit SymmetricOperator(Dense m) : storage_(std::move(m)) {}
  explicit SymmetricOperator(Sparse m) : storage_(std::move(m)) {}

  std::variant<Dense, Sparse> storage_;
};

}  // namespace meme

#endif  // MEME_SYMMETRIC_OPERATOR_HPP
