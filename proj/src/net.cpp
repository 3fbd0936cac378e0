#include "nac/net.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nac/error.hpp"
#include "nac/rng.hpp"

namespace nac {

namespace {

constexpr const char* kCheckpointMagic = "nac-two-layer-net v1";

// Places center + delta so that its distance to center is <= radius after
// rounding. Starts from the exact radial rescale and backs off by growing
// relative amounts.
Eigen::RowVectorXd place_within(const Eigen::Ref<const Eigen::RowVectorXd>& center,
                                const Eigen::Ref<const Eigen::RowVectorXd>& delta, double radius) {
  const double norm = delta.norm();
  double factor = radius / norm;
  double backoff = 0x1.0p-52;
  for (;;) {
    Eigen::RowVectorXd candidate = center + delta * factor;
    if ((candidate - center).norm() <= radius) return candidate;
    factor *= (1.0 - backoff);
    backoff *= 2.0;
  }
}

}  // namespace

TwoLayerNet::TwoLayerNet(Vector out_weights, Matrix hidden_init, Matrix hidden)
    : out_weights_(std::move(out_weights)),
      hidden_init_(std::move(hidden_init)),
      hidden_(std::move(hidden)) {
  if (out_weights_.size() < 1) throw ValidationError("network width must be >= 1");
  if (hidden_init_.rows() != out_weights_.size() || hidden_.rows() != hidden_init_.rows() ||
      hidden_.cols() != hidden_init_.cols()) {
    throw ValidationError("network weight shapes disagree");
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(out_weights_.size()));
}

TwoLayerNet TwoLayerNet::sym_init(int width, int dim, std::uint64_t seed) {
  if (width < 2 || width % 2 != 0) {
    throw ValidationError("symmetric initialization needs an even width >= 2, got " + std::to_string(width));
  }
  if (dim < 1) throw ValidationError("input dimension must be >= 1");
  Rng rng = make_rng(seed, 0x6e6574);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int half = width / 2;
  Vector c(width);
  Matrix theta(width, dim);
  for (int i = 0; i < half; ++i) {
    c[i] = (rng() & 1U) ? 1.0 : -1.0;
    c[i + half] = -c[i];
    for (int j = 0; j < dim; ++j) theta(i, j) = normal(rng);
    theta.row(i + half) = theta.row(i);
  }
  Matrix copy = theta;
  return TwoLayerNet(std::move(c), std::move(theta), std::move(copy));
}

void TwoLayerNet::set_hidden(Matrix hidden) {
  if (hidden.rows() != hidden_.rows() || hidden.cols() != hidden_.cols()) {
    throw ValidationError("hidden weight shape mismatch");
  }
  hidden_ = std::move(hidden);
}

double TwoLayerNet::forward(const Eigen::Ref<const Vector>& x, Weights which) const {
  if (x.size() != dim()) {
    throw ValidationError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                          std::to_string(dim()));
  }
  const Vector pre = weights(which) * x;
  return scale_ * out_weights_.dot(pre.cwiseMax(0.0));
}

Matrix TwoLayerNet::grad_hidden(const Eigen::Ref<const Vector>& x, Weights which) const {
  if (x.size() != dim()) throw ValidationError("input dimension mismatch in grad_hidden");
  const Vector pre = weights(which) * x;
  Vector coef(width());
  for (int i = 0; i < width(); ++i) coef[i] = pre[i] >= 0.0 ? scale_ * out_weights_[i] : 0.0;
  return coef * x.transpose();
}

double TwoLayerNet::max_row_deviation() const {
  return max_row_norm(hidden_ - hidden_init_);
}

bool TwoLayerNet::is_symmetric() const {
  if (width() % 2 != 0) return false;
  const int half = width() / 2;
  for (int i = 0; i < half; ++i) {
    if (out_weights_[i] != -out_weights_[i + half]) return false;
    if (hidden_init_.row(i) != hidden_init_.row(i + half)) return false;
  }
  return true;
}

double max_row_norm(const Matrix& rows) {
  if (rows.rows() == 0) return 0.0;
  return rows.rowwise().norm().maxCoeff();
}

Eigen::RowVectorXd project_row_around(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                      const Eigen::Ref<const Eigen::RowVectorXd>& center, double limit) {
  const Eigen::RowVectorXd delta = row - center;
  if (delta.norm() <= limit) return row;
  return place_within(center, delta, limit);
}

Matrix project_rows_ball(const Matrix& rows, double radius) {
  return project_rows_around(rows, Matrix::Zero(rows.rows(), rows.cols()), radius);
}

Matrix project_rows_around(const Matrix& rows, const Matrix& centers, double radius) {
  if (rows.rows() != centers.rows() || rows.cols() != centers.cols()) {
    throw ValidationError("projection center shape mismatch");
  }
  const double limit = radius / std::sqrt(static_cast<double>(rows.rows()));
  Matrix out = rows;
  for (int i = 0; i < rows.rows(); ++i) {
    out.row(i) = project_row_around(rows.row(i), centers.row(i), limit);
  }
  return out;
}

void write_checkpoint(std::ostream& out, const TwoLayerNet& net) {
  out << kCheckpointMagic << '\n';
  out << net.width() << ' ' << net.dim() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < net.width(); ++i) out << (i ? " " : "") << net.out_weights()[i];
  out << '\n';
  for (const Matrix* m : {&net.hidden_init(), &net.hidden()}) {
    for (int i = 0; i < m->rows(); ++i) {
      for (int j = 0; j < m->cols(); ++j) out << (j ? " " : "") << (*m)(i, j);
      out << '\n';
    }
  }
}

TwoLayerNet read_checkpoint(std::istream& in) {
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) throw IoError("not a network checkpoint (bad header)");
  int m = 0;
  int d = 0;
  if (!(in >> m >> d) || m < 1 || d < 1) throw IoError("checkpoint has a malformed shape line");
  Vector c(m);
  Matrix init(m, d);
  Matrix cur(m, d);
  for (int i = 0; i < m; ++i) in >> c[i];
  for (Matrix* mat : {&init, &cur}) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) in >> (*mat)(i, j);
    }
  }
  if (!in) throw IoError("checkpoint is truncated");
  return TwoLayerNet(std::move(c), std::move(init), std::move(cur));
}

void save_checkpoint(const std::string& path, const TwoLayerNet& net) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_checkpoint(out, net);
}

TwoLayerNet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace nac
