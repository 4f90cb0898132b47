#pragma once

// Dense spectral kernel. Every matrix function in the library goes through a
// full symmetric eigendecomposition.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>

namespace qig {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalues in ascending order and the orthogonal matrix of eigenvectors
/// (columns), so that A = U diag(eigenvalues) U^T.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Index dim() const { return eigenvalues.size(); }
  Matrix reconstruct() const;
};

/// Immutable self-adjoint operator on a finite truncation. The input is
/// symmetrized as (A + A^T)/2 and the spectral decomposition is computed on
/// construction, so copies are cheap and every accessor is const.
class HermitianOperator {
 public:
  /// Symmetrizes `m`; emits a warning if the asymmetry exceeds 1e-8.
  explicit HermitianOperator(const Matrix& m);

  /// Builds the operator from known eigenpairs without re-diagonalizing.
  /// Eigenpairs are reordered so the eigenvalues ascend.
  static HermitianOperator from_spectrum(Vector eigenvalues, Matrix eigenvectors);
  static HermitianOperator diagonal(const Vector& d);
  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);

  Index dim() const { return data_->matrix.rows(); }
  const Matrix& matrix() const { return data_->matrix; }
  const SpectralDecomposition& spectral() const { return data_->spectral; }
  const Vector& eigenvalues() const { return data_->spectral.eigenvalues; }
  const Matrix& eigenvectors() const { return data_->spectral.eigenvectors; }
  double min_eigenvalue() const { return eigenvalues()(0); }
  double max_eigenvalue() const { return eigenvalues()(eigenvalues().size() - 1); }
  double trace() const { return matrix().trace(); }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator operator-(const HermitianOperator& other) const;
  HermitianOperator operator*(double s) const;
  /// this + alpha * I. Shares the eigenvectors; eigenvalues shift exactly.
  HermitianOperator shifted(double alpha) const;

 private:
  struct Data {
    Matrix matrix;
    SpectralDecomposition spectral;
  };
  explicit HermitianOperator(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

inline HermitianOperator operator*(double s, const HermitianOperator& a) { return a * s; }

/// Real function applied to eigenvalues.
class MatrixFunction {
 public:
  enum class Kind { exp, log, power, negexp };

  static MatrixFunction exp() { return {Kind::exp, 0.0}; }
  static MatrixFunction log() { return {Kind::log, 0.0}; }
  static MatrixFunction power(double t) { return {Kind::power, t}; }
  /// x -> exp(-beta x)
  static MatrixFunction negexp(double beta) { return {Kind::negexp, beta}; }

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string name() const;

  /// Applies the function to every eigenvalue after checking the domain.
  /// Throws PreconditionError naming the first offending eigenvalue.
  Vector apply(const Vector& eigenvalues) const;

 private:
  MatrixFunction(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

/// Full symmetric eigendecomposition. Throws NumericalError on failure.
SpectralDecomposition spectral(const Matrix& symmetric);
inline const SpectralDecomposition& spectral(const HermitianOperator& a) { return a.spectral(); }

/// Eigenvalues only; cheaper than `spectral` when vectors are not needed.
/// Tridiagonal input is detected and handled in O(n^2).
Vector eigenvalues(const Matrix& symmetric);

/// U f(Lambda) U^T as a plain matrix.
Matrix function_matrix(const SpectralDecomposition& s, const MatrixFunction& f);

HermitianOperator matrix_fn(const HermitianOperator& a, const MatrixFunction& f);

/// Largest singular value. Works for non-symmetric input.
double operator_norm(const Matrix& a);
/// For symmetric input this is max |eigenvalue|.
double operator_norm(const HermitianOperator& a);

/// Trace norm of a symmetric matrix (sum of |eigenvalues|).
double trace_norm(const Matrix& symmetric);

/// Receives non-fatal diagnostics such as the asymmetry warning. The default
/// sink writes to stderr. Not thread-safe to change while operators are
/// being built on other threads.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace qig
