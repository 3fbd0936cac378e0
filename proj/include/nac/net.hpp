#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nac/types.hpp"

namespace nac {

enum class Weights { current, init };

/// Width-m two-layer ReLU network f(x) = (1/sqrt m) sum_i c_i relu(theta_i . x)
/// with frozen output signs c and a frozen copy of the initial hidden layer.
/// The same type backs the actor (c, theta) and the critic (b, W).
class TwoLayerNet {
 public:
  TwoLayerNet() = default;

  /// Builds a net from explicit weights; no symmetry requirement. `hidden`
  /// must have the same shape as `hidden_init`.
  TwoLayerNet(Vector out_weights, Matrix hidden_init, Matrix hidden);

  /// Paired initialization: rows i and i + m/2 share a standard-normal weight
  /// vector and carry opposite Rademacher output signs, so f is identically 0.
  static TwoLayerNet sym_init(int width, int dim, std::uint64_t seed);

  int width() const { return static_cast<int>(out_weights_.size()); }
  int dim() const { return static_cast<int>(hidden_.cols()); }
  double scale() const { return scale_; }

  const Vector& out_weights() const { return out_weights_; }
  const Matrix& hidden() const { return hidden_; }
  const Matrix& hidden_init() const { return hidden_init_; }
  const Matrix& weights(Weights which) const { return which == Weights::init ? hidden_init_ : hidden_; }

  void set_hidden(Matrix hidden);

  double forward(const Eigen::Ref<const Vector>& x, Weights which = Weights::current) const;

  /// Gradient with respect to the hidden layer; row i is
  /// (1/sqrt m) c_i 1{theta_i . x >= 0} x.
  Matrix grad_hidden(const Eigen::Ref<const Vector>& x, Weights which = Weights::current) const;

  /// Per-row deviation max_i ||theta_i - theta_i(0)||.
  double max_row_deviation() const;

  /// True when the pairing invariant of sym_init holds exactly.
  bool is_symmetric() const;

 private:
  Vector out_weights_;
  Matrix hidden_init_;
  Matrix hidden_;
  double scale_ = 0.0;
};

/// Rows with norm above radius / sqrt(m) are rescaled onto that sphere.
Matrix project_rows_ball(const Matrix& rows, double radius);

/// Row-wise projection of W onto balls of radius R / sqrt(m) centered at W0.
Matrix project_rows_around(const Matrix& rows, const Matrix& centers, double radius);

/// Projects one row onto the ball of absolute radius `limit` around `center`.
/// The result satisfies ||out - center|| <= limit after rounding.
Eigen::RowVectorXd project_row_around(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                      const Eigen::Ref<const Eigen::RowVectorXd>& center, double limit);

/// Largest row norm of the matrix.
double max_row_norm(const Matrix& rows);

/// Text checkpoint: a header line, then m and d, then c, theta(0) and theta
/// one row per line, all values printed round-trip exact.
void write_checkpoint(std::ostream& out, const TwoLayerNet& net);
TwoLayerNet read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const TwoLayerNet& net);
TwoLayerNet load_checkpoint(const std::string& path);

}  // namespace nac
