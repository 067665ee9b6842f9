#include "storyarcs/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

namespace storyarcs {

ArcMatrix ArcMatrix::from_arcs(std::span<const EmotionalArc> arcs) {
  ArcMatrix m;
  if (arcs.empty()) return m;
  const std::size_t n = arcs.front().values.size();
  m.values.resize(static_cast<Eigen::Index>(arcs.size()), static_cast<Eigen::Index>(n));
  m.book_ids.reserve(arcs.size());
  for (std::size_t r = 0; r < arcs.size(); ++r) {
    if (arcs[r].values.size() != n) throw DecompositionError("arcs differ in length");
    for (std::size_t c = 0; c < n; ++c) {
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = arcs[r].values[c];
    }
    m.book_ids.push_back(arcs[r].book_id);
  }
  return m;
}

bool ArcMatrix::rows_centered(double tolerance) const {
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    if (std::abs(values.row(r).sum()) > tolerance) return false;
  }
  return true;
}

Eigen::MatrixXd normalize_coefficients(const Eigen::MatrixXd& coefficients) {
  Eigen::MatrixXd out = coefficients;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double mass = out.row(r).cwiseAbs().sum();
    if (mass > 0) out.row(r) /= mass;
  }
  return out;
}

ModeDecomposition decompose(const ArcMatrix& matrix) {
  const Eigen::MatrixXd& a = matrix.values;
  if (a.rows() < 2 || a.cols() < 2) throw DecompositionError("need at least a 2x2 arc matrix");
  if (!a.allFinite()) throw DecompositionError("arc matrix has non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw DecompositionError("SVD did not converge");

  ModeDecomposition d;
  d.singular_values = svd.singularValues();
  d.left = svd.matrixU();
  d.modes = svd.matrixV().transpose();
  d.book_ids = matrix.book_ids;
  if (d.book_ids.size() != static_cast<std::size_t>(a.rows())) {
    d.book_ids.resize(static_cast<std::size_t>(a.rows()));
    std::iota(d.book_ids.begin(), d.book_ids.end(), 0);
  }

  for (Eigen::Index j = 0; j < d.modes.rows(); ++j) {
    Eigen::Index peak = 0;
    for (Eigen::Index t = 1; t < d.modes.cols(); ++t) {
      if (std::abs(d.modes(j, t)) > std::abs(d.modes(j, peak))) peak = t;
    }
    if (d.modes(j, peak) < 0) {
      d.modes.row(j) *= -1.0;
      d.left.col(j) *= -1.0;
    }
  }

  d.coefficients = d.left * d.singular_values.asDiagonal();
  d.normalized = normalize_coefficients(d.coefficients);
  if (!d.coefficients.allFinite() || !d.modes.allFinite()) {
    throw DecompositionError("SVD produced non-finite values");
  }
  return d;
}

double variance_explained(const ModeDecomposition& d, std::size_t m) {
  if (m < 1 || m > d.mode_count()) {
    throw DecompositionError("mode count " + std::to_string(m) + " outside [1, " +
                             std::to_string(d.mode_count()) + "]");
  }
  const Eigen::VectorXd energy = d.singular_values.cwiseAbs2();
  const double total = energy.sum();
  if (total <= 0) throw DecompositionError("zero matrix has no variance to explain");
  return energy.head(static_cast<Eigen::Index>(m)).sum() / total;
}

Eigen::VectorXd reconstruct(const ModeDecomposition& d, std::size_t row, std::size_t m) {
  if (row >= static_cast<std::size_t>(d.coefficients.rows())) {
    throw DecompositionError("row " + std::to_string(row) + " out of range");
  }
  if (m < 1 || m > d.mode_count()) throw DecompositionError("mode count out of range");
  const auto r = static_cast<Eigen::Index>(row);
  const auto k = static_cast<Eigen::Index>(m);
  return (d.coefficients.row(r).head(k) * d.modes.topRows(k)).transpose();
}

std::string SignedMode::label() const {
  return std::string(polarity == Polarity::positive ? "+" : "-") + "SV" + std::to_string(mode + 1);
}

std::vector<RankedBook> rank_books_for_mode(const ModeDecomposition& d, std::size_t mode,
                                            Polarity polarity, std::size_t k) {
  if (mode >= d.mode_count()) throw DecompositionError("mode " + std::to_string(mode) + " out of range");
  const auto column = d.normalized.col(static_cast<Eigen::Index>(mode));
  std::vector<RankedBook> books;
  books.reserve(static_cast<std::size_t>(column.size()));
  for (Eigen::Index r = 0; r < column.size(); ++r) {
    books.push_back({static_cast<std::size_t>(r), d.book_ids[static_cast<std::size_t>(r)], column(r)});
  }
  std::stable_sort(books.begin(), books.end(), [&](const RankedBook& a, const RankedBook& b) {
    return polarity == Polarity::positive ? a.coefficient > b.coefficient
                                          : a.coefficient < b.coefficient;
  });
  books.resize(std::min(k, books.size()));
  return books;
}

SignedMode assign_mode(const ModeDecomposition& d, std::size_t row) {
  if (row >= static_cast<std::size_t>(d.normalized.rows())) {
    throw DecompositionError("row " + std::to_string(row) + " out of range");
  }
  const auto coeffs = d.normalized.row(static_cast<Eigen::Index>(row));
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < coeffs.size(); ++j) {
    if (std::abs(coeffs(j)) > std::abs(coeffs(best))) best = j;
  }
  return {static_cast<std::size_t>(best), coeffs(best) < 0 ? Polarity::negative : Polarity::positive};
}

}  // namespace storyarcs
