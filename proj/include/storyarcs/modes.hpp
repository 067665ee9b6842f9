#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "storyarcs/arcs.hpp"
#include "storyarcs/error.hpp"

namespace storyarcs {

class DecompositionError : public Error {
 public:
  using Error::Error;
};

// Rows are books, columns are arc points.
struct ArcMatrix {
  Eigen::MatrixXd values;
  std::vector<std::int64_t> book_ids;

  static ArcMatrix from_arcs(std::span<const EmotionalArc> arcs);
  bool rows_centered(double tolerance = 1e-9) const;
};

// A = W * modes, with W = U * diag(singular_values).
struct ModeDecomposition {
  Eigen::MatrixXd modes;         // k x n, orthonormal rows (V^T)
  Eigen::VectorXd singular_values;  // k, non-increasing
  Eigen::MatrixXd left;          // books x k (U)
  Eigen::MatrixXd coefficients;  // books x k (W)
  Eigen::MatrixXd normalized;    // rows of W scaled to unit L1 mass
  std::vector<std::int64_t> book_ids;

  std::size_t mode_count() const { return static_cast<std::size_t>(singular_values.size()); }
};

// Rows scaled to unit L1 mass; all-zero rows stay zero.
Eigen::MatrixXd normalize_coefficients(const Eigen::MatrixXd& coefficients);

// Thin SVD. Each mode is flipped so its largest-magnitude component (first
// one on ties) is positive, with the matching column of U flipped too.
ModeDecomposition decompose(const ArcMatrix& matrix);

// Share of total squared singular mass carried by the first m modes.
double variance_explained(const ModeDecomposition& d, std::size_t m);

// Sum over the first m modes of W(row, j) * modes(j, :).
Eigen::VectorXd reconstruct(const ModeDecomposition& d, std::size_t row, std::size_t m);

enum class Polarity { positive, negative };

struct SignedMode {
  std::size_t mode = 0;  // zero-based
  Polarity polarity = Polarity::positive;

  // "+SV1", "-SV3", ... (one-based, as usually reported).
  std::string label() const;
  auto operator<=>(const SignedMode&) const = default;
};

struct RankedBook {
  std::size_t row = 0;
  std::int64_t book_id = 0;
  double coefficient = 0.0;
};

// Positive polarity: descending normalized coefficient; negative: ascending
// (most negative first). Equal coefficients keep row order.
std::vector<RankedBook> rank_books_for_mode(const ModeDecomposition& d, std::size_t mode,
                                            Polarity polarity, std::size_t k);

// Mode with the largest |normalized coefficient| in the row (lowest mode on
// ties), signed by that coefficient. A zero coefficient counts as positive.
SignedMode assign_mode(const ModeDecomposition& d, std::size_t row);

}  // namespace storyarcs
