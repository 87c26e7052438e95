#include "coarsedim/block_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "coarsedim/errors.hpp"

namespace coarsedim {

BlockMatrix BlockMatrix::identity(std::size_t nodes, std::size_t fiber) {
  BlockMatrix m(nodes, fiber);
  for (std::size_t x = 0; x < nodes; ++x) m.blocks_.emplace(Key{x, x}, Block::Identity(fiber, fiber));
  return m;
}

BlockMatrix BlockMatrix::diagonal(const std::vector<double>& values, std::size_t fiber) {
  BlockMatrix m(values.size(), fiber);
  for (std::size_t x = 0; x < values.size(); ++x)
    if (values[x] != 0.0) m.blocks_.emplace(Key{x, x}, values[x] * Block::Identity(fiber, fiber));
  return m;
}

BlockMatrix BlockMatrix::from_dense(const Block& dense, std::size_t fiber, double drop) {
  if (fiber == 0 || dense.rows() != dense.cols() || dense.rows() % static_cast<long>(fiber) != 0)
    throw IncompatibleOperands("dense matrix does not split into fiber blocks");
  const auto f = static_cast<long>(fiber);
  BlockMatrix m(static_cast<std::size_t>(dense.rows() / f), fiber);
  for (std::size_t x = 0; x < m.nodes_; ++x)
    for (std::size_t y = 0; y < m.nodes_; ++y) {
      Block b = dense.block(static_cast<long>(x) * f, static_cast<long>(y) * f, f, f);
      if (b.norm() > drop) m.blocks_.emplace(Key{x, y}, std::move(b));
    }
  return m;
}

const Block* BlockMatrix::find(std::size_t x, std::size_t y) const {
  auto it = blocks_.find({x, y});
  return it == blocks_.end() ? nullptr : &it->second;
}

Block BlockMatrix::block(std::size_t x, std::size_t y) const {
  const Block* b = find(x, y);
  return b ? *b : Block::Zero(static_cast<long>(fiber_), static_cast<long>(fiber_));
}

void BlockMatrix::set(std::size_t x, std::size_t y, Block b) {
  if (x >= nodes_ || y >= nodes_) throw InvalidParameter("block index outside the matrix");
  blocks_[{x, y}] = std::move(b);
}

void BlockMatrix::accumulate(std::size_t x, std::size_t y, const Block& b) {
  if (x >= nodes_ || y >= nodes_) throw InvalidParameter("block index outside the matrix");
  auto [it, fresh] = blocks_.try_emplace(Key{x, y}, b);
  if (!fresh) it->second += b;
}

void BlockMatrix::prune(double rel) {
  const double cut = rel * max_block_norm();
  for (auto it = blocks_.begin(); it != blocks_.end();) {
    const double n = it->second.norm();
    if (n == 0.0 || n <= cut)
      it = blocks_.erase(it);
    else
      ++it;
  }
}

Block BlockMatrix::to_dense() const {
  const auto f = static_cast<long>(fiber_);
  Block d = Block::Zero(static_cast<long>(dim()), static_cast<long>(dim()));
  for (const auto& [k, b] : blocks_) d.block(static_cast<long>(k.first) * f, static_cast<long>(k.second) * f, f, f) = b;
  return d;
}

double BlockMatrix::max_block_norm() const {
  double m = 0.0;
  for (const auto& [k, b] : blocks_) m = std::max(m, b.norm());
  return m;
}

namespace {
void require_same(const BlockMatrix& a, const BlockMatrix& b) {
  if (a.nodes() != b.nodes() || a.fiber() != b.fiber())
    throw IncompatibleOperands("block matrices differ in size or fiber");
}
}  // namespace

BlockMatrix& BlockMatrix::operator+=(const BlockMatrix& other) {
  require_same(*this, other);
  for (const auto& [k, b] : other.blocks_) accumulate(k.first, k.second, b);
  prune();
  return *this;
}

BlockMatrix& BlockMatrix::operator-=(const BlockMatrix& other) {
  require_same(*this, other);
  for (const auto& [k, b] : other.blocks_) accumulate(k.first, k.second, -b);
  prune();
  return *this;
}

BlockMatrix& BlockMatrix::operator*=(Complex s) {
  if (s == Complex(0.0)) {
    blocks_.clear();
    return *this;
  }
  for (auto& [k, b] : blocks_) b *= s;
  return *this;
}

BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b) { return a += b; }
BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b) { return a -= b; }
BlockMatrix operator*(Complex s, BlockMatrix a) { return a *= s; }

BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b) {
  require_same(a, b);
  // Rough count of block products against a dense multiply, which runs far
  // faster per flop; switch when the operands are heavily filled.
  const double n = static_cast<double>(a.nodes());
  const double sparse_cost = static_cast<double>(a.nnz_blocks()) * static_cast<double>(b.nnz_blocks()) / std::max(n, 1.0);
  if (sparse_cost > n * n * n / 16.0 && n > 8) {
    BlockMatrix out = BlockMatrix::from_dense(a.to_dense() * b.to_dense(), a.fiber());
    out.prune();
    return out;
  }
  BlockMatrix out(a.nodes(), a.fiber());
  const auto& bb = b.blocks();
  for (const auto& [ka, ba] : a.blocks()) {
    for (auto it = bb.lower_bound({ka.second, 0}); it != bb.end() && it->first.first == ka.second; ++it)
      out.accumulate(ka.first, it->first.second, ba * it->second);
  }
  out.prune();
  return out;
}

BlockMatrix adjoint(const BlockMatrix& a) {
  BlockMatrix out(a.nodes(), a.fiber());
  for (const auto& [k, b] : a.blocks()) out.set(k.second, k.first, b.adjoint());
  return out;
}

BlockMatrix compress(const BlockMatrix& a, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols) {
  std::vector<bool> in_rows(a.nodes(), false), in_cols(a.nodes(), false);
  for (auto x : rows) {
    if (x >= a.nodes()) throw InvalidParameter("compression set outside the matrix");
    in_rows[x] = true;
  }
  for (auto y : cols) {
    if (y >= a.nodes()) throw InvalidParameter("compression set outside the matrix");
    in_cols[y] = true;
  }
  BlockMatrix out(a.nodes(), a.fiber());
  for (const auto& [k, b] : a.blocks())
    if (in_rows[k.first] && in_cols[k.second]) out.set(k.first, k.second, b);
  return out;
}

namespace {

// Components of the pattern graph. Nodes 0..n-1 are rows, n..2n-1 columns
// (bipartite) unless `symmetric`, in which case rows and columns are merged.
struct Piece {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

std::vector<Piece> pieces(const BlockMatrix& a, bool symmetric) {
  const std::size_t n = a.nodes();
  const std::size_t total = symmetric ? n : 2 * n;
  std::vector<std::size_t> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<bool> used_row(n, false), used_col(n, false);
  for (const auto& [k, b] : a.blocks()) {
    used_row[k.first] = true;
    used_col[k.second] = true;
    const std::size_t u = find(k.first), v = find(symmetric ? k.second : n + k.second);
    if (u != v) parent[std::max(u, v)] = std::min(u, v);
  }
  std::map<std::size_t, Piece> groups;
  for (std::size_t x = 0; x < n; ++x) {
    if (symmetric) {
      if (used_row[x] || used_col[x]) {
        auto& p = groups[find(x)];
        p.rows.push_back(x);
        p.cols.push_back(x);
      }
    } else {
      if (used_row[x]) groups[find(x)].rows.push_back(x);
      if (used_col[x]) groups[find(n + x)].cols.push_back(x);
    }
  }
  std::vector<Piece> out;
  out.reserve(groups.size());
  for (auto& [root, p] : groups) out.push_back(std::move(p));
  return out;
}

Block gather(const BlockMatrix& a, const Piece& p) {
  const auto f = static_cast<long>(a.fiber());
  std::map<std::size_t, long> row_pos, col_pos;
  for (std::size_t i = 0; i < p.rows.size(); ++i) row_pos[p.rows[i]] = static_cast<long>(i);
  for (std::size_t i = 0; i < p.cols.size(); ++i) col_pos[p.cols[i]] = static_cast<long>(i);
  Block d = Block::Zero(static_cast<long>(p.rows.size()) * f, static_cast<long>(p.cols.size()) * f);
  for (std::size_t x : p.rows) {
    const auto& bb = a.blocks();
    for (auto it = bb.lower_bound({x, 0}); it != bb.end() && it->first.first == x; ++it) {
      auto c = col_pos.find(it->first.second);
      if (c != col_pos.end()) d.block(row_pos[x] * f, c->second * f, f, f) = it->second;
    }
  }
  return d;
}

}  // namespace

double norm_upper_bound(const BlockMatrix& a) {
  std::map<std::size_t, double> rows, cols;
  double frob = 0.0;
  for (const auto& [k, b] : a.blocks()) {
    const double n2 = b.squaredNorm();
    frob += n2;
    rows[k.first] += std::sqrt(n2);
    cols[k.second] += std::sqrt(n2);
  }
  double r = 0.0, c = 0.0;
  for (const auto& [x, v] : rows) r = std::max(r, v);
  for (const auto& [x, v] : cols) c = std::max(c, v);
  return std::min(std::sqrt(frob), std::sqrt(r * c));
}

double norm_upper_bound(const Block& dense) {
  const Eigen::MatrixXd mod = dense.cwiseAbs();
  const double schur = std::sqrt(mod.rowwise().sum().maxCoeff() * mod.colwise().sum().maxCoeff());
  return std::min(dense.norm(), schur);
}

bool RunningMax::offer(const Block& dense) {
  if (dense.size() == 0 || norm_upper_bound(dense) <= value_) return false;
  const double n = static_cast<std::size_t>(std::max(dense.rows(), dense.cols())) <= opts_.dense_threshold
                       ? Eigen::BDCSVD<Block>(dense).singularValues()(0)
                       : power_iteration_norm(dense, opts_);
  if (n <= value_) return false;
  value_ = n;
  return true;
}

bool RunningMax::offer(const BlockMatrix& a) {
  if (norm_upper_bound(a) <= value_) return false;
  const double n = operator_norm(a, opts_);
  if (n <= value_) return false;
  value_ = n;
  return true;
}

double power_iteration_norm(const Block& dense, const NormOptions& opts) {
  if (dense.size() == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Vector v(dense.cols());
  for (long i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v.normalize();
  double lambda = 0.0;
  double residual = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    Vector w = dense.adjoint() * (dense * v);
    const double next = std::real(v.dot(w));
    residual = (w - next * v).norm();
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    if (std::abs(next - lambda) <= opts.tolerance * std::max(next, 1e-300) &&
        residual <= std::sqrt(opts.tolerance) * std::max(next, 1e-300))
      return std::sqrt(next);
    lambda = next;
    v = w / wn;
  }
  throw ConvergenceFailure("power iteration did not converge", residual);
}

double operator_norm(const BlockMatrix& a, const NormOptions& opts) {
  double best = 0.0;
  for (const Piece& p : pieces(a, false)) {
    Block d = gather(a, p);
    double s = 0.0;
    if (static_cast<std::size_t>(std::max(d.rows(), d.cols())) <= opts.dense_threshold) {
      if (d.rows() == 1 || d.cols() == 1)
        s = d.norm();
      else
        s = Eigen::BDCSVD<Block>(d).singularValues()(0);
    } else {
      s = power_iteration_norm(d, opts);
    }
    best = std::max(best, s);
  }
  return best;
}

Eigen::SelfAdjointEigenSolver<Block> hermitian_eig(const Block& m) {
  Block sym = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<Block>(sym);
}

namespace {

template <class F>
BlockMatrix spectral_apply(const BlockMatrix& h, F&& f, double f_zero) {
  const auto fb = static_cast<long>(h.fiber());
  BlockMatrix out(h.nodes(), h.fiber());
  std::vector<bool> seen(h.nodes(), false);
  for (const Piece& p : pieces(h, true)) {
    const Block d = gather(h, p);
    const auto eig = hermitian_eig(d);
    Eigen::VectorXd vals = eig.eigenvalues();
    for (long i = 0; i < vals.size(); ++i) vals[i] = f(vals[i]);
    const Block r = eig.eigenvectors() * vals.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      seen[p.rows[i]] = true;
      for (std::size_t j = 0; j < p.cols.size(); ++j) {
        Block b = r.block(static_cast<long>(i) * fb, static_cast<long>(j) * fb, fb, fb);
        if (b.norm() > 0.0) out.set(p.rows[i], p.cols[j], std::move(b));
      }
    }
  }
  if (f_zero != 0.0)
    for (std::size_t x = 0; x < h.nodes(); ++x)
      if (!seen[x]) out.set(x, x, f_zero * Block::Identity(fb, fb));
  out.prune();
  return out;
}

}  // namespace

BlockMatrix hermitian_function(const BlockMatrix& h, const std::function<double(double)>& f) {
  return spectral_apply(h, f, f(0.0));
}

double min_eigenvalue(const BlockMatrix& h) {
  double lo = 0.0;
  bool any = false;
  std::size_t covered = 0;
  for (const Piece& p : pieces(h, true)) {
    const auto eig = hermitian_eig(gather(h, p));
    const double v = eig.eigenvalues()(0);
    lo = any ? std::min(lo, v) : v;
    any = true;
    covered += p.rows.size();
  }
  if (!any) return 0.0;
  if (covered < h.nodes()) lo = std::min(lo, 0.0);
  return lo;
}

BlockMatrix positive_pseudo_inverse(const BlockMatrix& h, double cutoff, double reference) {
  double top = reference;
  if (top <= 0.0)
    for (const Piece& p : pieces(h, true)) {
    const auto eig = hermitian_eig(gather(h, p));
    top = std::max(top, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  const double cut = cutoff * top;
  return spectral_apply(h, [cut](double v) { return v > cut ? 1.0 / v : 0.0; }, 0.0);
}

double rank_two_norm(const Block& x, const Block& y) {
  if (x.cols() != y.cols() || x.rows() == 0) throw IncompatibleOperands("factors of X Y^* must have matching columns");
  // X = Q R gives ||X Y^*|| = ||Y R^*||; no square roots of eigenvalues, so
  // cancellation to zero stays at machine precision.
  if (x.rows() < x.cols()) return Eigen::JacobiSVD<Block>(x * y.adjoint()).singularValues()(0);
  Eigen::HouseholderQR<Block> qr(x);
  const Block r = qr.matrixQR().topRows(x.cols()).triangularView<Eigen::Upper>();
  const Block m = y * r.adjoint();
  return Eigen::JacobiSVD<Block>(m).singularValues()(0);
}

}  // namespace coarsedim
