#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace coarsedim {

using Complex = std::complex<double>;
using Block = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Key = std::pair<std::size_t, std::size_t>;

// Square matrix over nodes x nodes whose entries are fiber x fiber blocks.
// Only nonzero blocks are stored; iteration is row-major by (row, col).
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(std::size_t nodes, std::size_t fiber) : nodes_(nodes), fiber_(fiber) {}

  static BlockMatrix identity(std::size_t nodes, std::size_t fiber);
  static BlockMatrix diagonal(const std::vector<double>& values, std::size_t fiber);
  static BlockMatrix from_dense(const Block& dense, std::size_t fiber, double drop = 0.0);

  std::size_t nodes() const { return nodes_; }
  std::size_t fiber() const { return fiber_; }
  std::size_t dim() const { return nodes_ * fiber_; }
  bool empty() const { return blocks_.empty(); }
  std::size_t nnz_blocks() const { return blocks_.size(); }

  const std::map<Key, Block>& blocks() const { return blocks_; }
  const Block* find(std::size_t x, std::size_t y) const;
  Block block(std::size_t x, std::size_t y) const;  // zero block when absent

  void set(std::size_t x, std::size_t y, Block b);
  void accumulate(std::size_t x, std::size_t y, const Block& b);
  void erase(std::size_t x, std::size_t y) { blocks_.erase({x, y}); }

  // Drops blocks with Frobenius norm <= rel * (largest block norm), and exact zeros.
  void prune(double rel = 1e-14);

  Block to_dense() const;
  double max_block_norm() const;

  BlockMatrix& operator+=(const BlockMatrix& other);
  BlockMatrix& operator-=(const BlockMatrix& other);
  BlockMatrix& operator*=(Complex s);

 private:
  std::size_t nodes_ = 0;
  std::size_t fiber_ = 1;
  std::map<Key, Block> blocks_;
};

BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b);
BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b);
BlockMatrix operator*(Complex s, BlockMatrix a);
BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b);
BlockMatrix adjoint(const BlockMatrix& a);

// Keeps blocks (x, y) with x in rows and y in cols.
BlockMatrix compress(const BlockMatrix& a, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols);

struct NormOptions {
  std::size_t dense_threshold = 2048;
  double tolerance = 1e-10;
  std::size_t max_iterations = 50'000;
};

// Largest singular value. The matrix is split into independent pieces along
// the connected components of its block pattern; each piece is handled by a
// dense SVD or, above the threshold, by power iteration on T*T.
double operator_norm(const BlockMatrix& a, const NormOptions& opts = {});

double power_iteration_norm(const Block& dense, const NormOptions& opts = {});

// Cheap bound ||T|| <= min(Frobenius, Schur test on block norms).
double norm_upper_bound(const BlockMatrix& a);
double norm_upper_bound(const Block& dense);

// Exact maximum of operator norms over a stream; the SVD is skipped whenever
// the cheap bound cannot beat the current maximum.
class RunningMax {
 public:
  explicit RunningMax(NormOptions opts = {}) : opts_(opts) {}
  bool offer(const BlockMatrix& a);  // true when a becomes the new maximum
  bool offer(const Block& dense);
  double value() const { return value_; }

 private:
  NormOptions opts_;
  double value_ = 0.0;
};

// f applied to a Hermitian block matrix through its eigendecomposition, one
// connected component at a time. Components that are absent (zero) map to f(0),
// which must be 0 for the result to stay sparse; callers check that.
BlockMatrix hermitian_function(const BlockMatrix& h, const std::function<double(double)>& f);

// Moore-Penrose inverse of a positive matrix; eigenvalues <= cutoff * top are
// dropped, top being `reference` when positive and the largest eigenvalue otherwise.
BlockMatrix positive_pseudo_inverse(const BlockMatrix& h, double cutoff = 1e-12, double reference = -1.0);

double min_eigenvalue(const BlockMatrix& h);

// Hermitian eigendecomposition of a dense matrix after symmetrising.
Eigen::SelfAdjointEigenSolver<Block> hermitian_eig(const Block& m);

// ||X Y^*|| for tall thin X and Y with the same number of columns, e.g. the
// rank-two commutators p e_j^T - e_i q^T.
double rank_two_norm(const Block& x, const Block& y);

}  // namespace coarsedim
