#include "qig/linalg.hpp"

#include "qig/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

namespace qig {

namespace {

constexpr double kAsymmetryWarning = 1e-8;
constexpr double kNegativeFloor = 1e-14;

WarningSink& warning_sink() {
  static WarningSink sink = [](const std::string& msg) { std::cerr << "qig warning: " << msg << '\n'; };
  return sink;
}

Matrix symmetrize(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "operator must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
  if (m.rows() < 1) throw DimensionError("operator dimension must be at least 1");
  if (!m.allFinite()) throw PreconditionError("operator has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
  if (asym > kAsymmetryWarning) {
    std::ostringstream os;
    os << "input matrix asymmetry " << asym << " exceeds " << kAsymmetryWarning << "; symmetrizing";
    warn(os.str());
  }
  return 0.5 * (m + m.transpose());
}

bool is_tridiagonal(const Matrix& m) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (std::abs(i - j) > 1 && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

bool is_nonnegative_integer(double t) { return t >= 0.0 && std::floor(t) == t; }

}  // namespace

void set_warning_sink(WarningSink sink) { warning_sink() = std::move(sink); }

void warn(const std::string& message) {
  if (warning_sink()) warning_sink()(message);
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpectralDecomposition spectral(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge (dim " +
                         std::to_string(symmetric.rows()) + ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector eigenvalues(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  if (symmetric.rows() > 2 && is_tridiagonal(symmetric)) {
    Vector diag = symmetric.diagonal();
    Vector sub = symmetric.diagonal(-1);
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  } else {
    solver.compute(symmetric, Eigen::EigenvaluesOnly);
  }
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigenvalue iteration did not converge (dim " +
                         std::to_string(symmetric.rows()) + ")");
  }
  return solver.eigenvalues();
}

HermitianOperator::HermitianOperator(const Matrix& m) {
  auto data = std::make_shared<Data>();
  data->matrix = symmetrize(m);
  data->spectral = qig::spectral(data->matrix);
  data_ = std::move(data);
}

HermitianOperator HermitianOperator::from_spectrum(Vector eigenvalues, Matrix eigenvectors) {
  const Index n = eigenvalues.size();
  if (n < 1 || eigenvectors.rows() != n || eigenvectors.cols() != n) {
    throw DimensionError("eigenpair shapes do not match");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return eigenvalues(a) < eigenvalues(b); });
  auto data = std::make_shared<Data>();
  data->spectral.eigenvalues.resize(n);
  data->spectral.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    data->spectral.eigenvalues(k) = eigenvalues(order[static_cast<std::size_t>(k)]);
    data->spectral.eigenvectors.col(k) = eigenvectors.col(order[static_cast<std::size_t>(k)]);
  }
  const Matrix m = data->spectral.reconstruct();
  data->matrix = 0.5 * (m + m.transpose());
  return HermitianOperator(std::shared_ptr<const Data>(std::move(data)));
}

HermitianOperator HermitianOperator::diagonal(const Vector& d) {
  return from_spectrum(d, Matrix::Identity(d.size(), d.size()));
}

HermitianOperator HermitianOperator::identity(Index dim) { return diagonal(Vector::Ones(dim)); }

HermitianOperator HermitianOperator::zero(Index dim) { return diagonal(Vector::Zero(dim)); }

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  if (dim() != other.dim()) throw DimensionError("operator dimensions differ");
  return HermitianOperator(Matrix(matrix() + other.matrix()));
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& other) const {
  if (dim() != other.dim()) throw DimensionError("operator dimensions differ");
  return HermitianOperator(Matrix(matrix() - other.matrix()));
}

HermitianOperator HermitianOperator::operator*(double s) const {
  auto data = std::make_shared<Data>();
  data->matrix = s * matrix();
  data->spectral.eigenvectors = eigenvectors();
  data->spectral.eigenvalues = s * eigenvalues();
  if (s < 0.0) {
    data->spectral.eigenvalues.reverseInPlace();
    data->spectral.eigenvectors = data->spectral.eigenvectors.rowwise().reverse().eval();
  }
  return HermitianOperator(std::shared_ptr<const Data>(std::move(data)));
}

HermitianOperator HermitianOperator::shifted(double alpha) const {
  auto data = std::make_shared<Data>();
  data->matrix = matrix();
  data->matrix.diagonal().array() += alpha;
  data->spectral.eigenvectors = eigenvectors();
  data->spectral.eigenvalues = eigenvalues().array() + alpha;
  return HermitianOperator(std::shared_ptr<const Data>(std::move(data)));
}

std::string MatrixFunction::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::exp: return "exp";
    case Kind::log: return "log";
    case Kind::power: os << "power(" << parameter_ << ")"; return os.str();
    case Kind::negexp: os << "negexp(" << parameter_ << ")"; return os.str();
  }
  return "?";
}

Vector MatrixFunction::apply(const Vector& eigenvalues) const {
  const Index n = eigenvalues.size();
  const double scale = n > 0 ? std::max(1.0, eigenvalues.cwiseAbs().maxCoeff()) : 1.0;
  auto reject = [&](Index i, const char* why) {
    std::ostringstream os;
    os.precision(17);
    os << name() << ": eigenvalue " << eigenvalues(i) << " (index " << i << ") " << why;
    throw PreconditionError(os.str());
  };
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double x = eigenvalues(i);
    switch (kind_) {
      case Kind::exp: out(i) = std::exp(x); break;
      case Kind::negexp: out(i) = std::exp(-parameter_ * x); break;
      case Kind::log:
        if (!(x > 0.0)) reject(i, "is not positive");
        out(i) = std::log(x);
        break;
      case Kind::power: {
        const double t = parameter_;
        if (is_nonnegative_integer(t)) {
          out(i) = std::pow(x, t);
        } else if (t < 0.0) {
          if (x < kNegativeFloor) reject(i, "is below 1e-14 under a negative power");
          out(i) = std::pow(x, t);
        } else {
          // Fractional positive power: zero is in the domain.
          if (x < -kNegativeFloor * scale) reject(i, "is negative under a fractional power");
          out(i) = x > 0.0 ? std::pow(x, t) : 0.0;
        }
        break;
      }
    }
  }
  return out;
}

Matrix function_matrix(const SpectralDecomposition& s, const MatrixFunction& f) {
  const Vector fx = f.apply(s.eigenvalues);
  Matrix m = s.eigenvectors * fx.asDiagonal() * s.eigenvectors.transpose();
  return 0.5 * (m + m.transpose());
}

HermitianOperator matrix_fn(const HermitianOperator& a, const MatrixFunction& f) {
  return HermitianOperator::from_spectrum(f.apply(a.eigenvalues()), a.eigenvectors());
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  // sqrt of the top eigenvalue of the Gram matrix. Squaring loses accuracy
  // only in the small singular values.
  const Matrix gram = a.rows() >= a.cols() ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed on the Gram matrix");
  return std::sqrt(std::max(0.0, solver.eigenvalues()(gram.rows() - 1)));
}

double operator_norm(const HermitianOperator& a) {
  return std::max(std::abs(a.min_eigenvalue()), std::abs(a.max_eigenvalue()));
}

double trace_norm(const Matrix& symmetric) {
  return eigenvalues(0.5 * (symmetric + symmetric.transpose())).cwiseAbs().sum();
}

}  // namespace qig
