#include "linksteal/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace linksteal {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;

ConstMap view(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

// Eigen's vectorised kernels split loops by buffer address, so rounding
// depends on alignment. Products run on Eigen-owned buffers, which are
// always maximally aligned, to keep results independent of the allocator.
RowMajor owned(const Tensor& t) { return view(t); }

Tensor from_owned(const RowMajor& m) {
  return Tensor(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                std::vector<double>(m.data(), m.data() + m.size()));
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

Tensor Tensor::row_vector(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::require_finite(const char* where) const {
  for (double x : data_) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite value produced in ") + where);
    }
  }
}

std::string shape_string(const Tensor& t) {
  std::ostringstream os;
  os << '[' << t.rows() << " x " << t.cols() << ']';
  return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch: " + shape_string(a) + " * " + shape_string(b));
  }
  if (a.rows() == 0 || b.cols() == 0 || a.cols() == 0) return Tensor(a.rows(), b.cols());
  const RowMajor lhs = owned(a), rhs = owned(b);
  RowMajor out(lhs.rows(), rhs.cols());
  out.noalias() = lhs * rhs;
  return from_owned(out);
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn shape mismatch: " + shape_string(a) + "^T * " + shape_string(b));
  }
  if (a.cols() == 0 || b.cols() == 0 || a.rows() == 0) return Tensor(a.cols(), b.cols());
  const RowMajor lhs = owned(a), rhs = owned(b);
  RowMajor out(lhs.cols(), rhs.cols());
  out.noalias() = lhs.transpose() * rhs;
  return from_owned(out);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt shape mismatch: " + shape_string(a) + " * " + shape_string(b) + "^T");
  }
  if (a.rows() == 0 || b.rows() == 0 || a.cols() == 0) return Tensor(a.rows(), b.rows());
  const RowMajor lhs = owned(a), rhs = owned(b);
  RowMajor out(lhs.rows(), rhs.rows());
  out.noalias() = lhs * rhs.transpose();
  return from_owned(out);
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor gather_rows(const Tensor& a, std::span<const int> rows) {
  Tensor out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<std::size_t>(rows[i]);
    if (rows[i] < 0 || r >= a.rows()) throw std::out_of_range("gather_rows: row index out of range");
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(i).begin());
  }
  return out;
}

Tensor softmax_with_temperature(const Tensor& logits, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax temperature must be positive");
  Tensor out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto o = out.row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp((in[j] - mx) / temperature);
      total += o[j];
    }
    for (double& x : o) x /= total;
  }
  out.require_finite("softmax_with_temperature");
  return out;
}

std::ostream& operator<<(std::ostream& os, const Tensor& t) {
  const auto precision = os.precision(17);
  os << shape_string(t);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    os << "\n ";
    for (std::size_t c = 0; c < t.cols(); ++c) os << ' ' << t(r, c);
  }
  os.precision(precision);
  return os;
}

}  // namespace linksteal
