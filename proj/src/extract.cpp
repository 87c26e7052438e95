#include "coarsedim/extract.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "coarsedim/errors.hpp"

namespace coarsedim {

EdgeDecomposition decompose_neighbors(SpacePtr space, double r, std::size_t fiber) {
  if (!(r >= 0.0)) throw InvalidParameter("scale must be nonnegative");
  const std::size_t n = space->size();
  const auto scale = space->scale(r);
  EdgeDecomposition dec;
  std::vector<std::vector<bool>> used_first, used_second;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (!space->within(x, y, scale)) continue;
      ++dec.edges;
      std::size_t m = 0;
      while (m < dec.parts.size() && (used_first[m][x] || used_second[m][y])) ++m;
      if (m == dec.parts.size()) {
        dec.parts.emplace_back();
        used_first.emplace_back(n, false);
        used_second.emplace_back(n, false);
      }
      dec.parts[m].emplace_back(x, y);
      used_first[m][x] = true;
      used_second[m][y] = true;
    }
  for (const auto& part : dec.parts) dec.translations.push_back(partial_translation(space, fiber, part));
  return dec;
}

DecompositionCheck verify_decomposition(const EdgeDecomposition& dec, const FiniteMetricSpace& space, double r) {
  DecompositionCheck check;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t total = 0;
  for (const auto& part : dec.parts) {
    std::set<std::size_t> firsts, seconds;
    for (const auto& [x, y] : part) {
      if (!firsts.insert(x).second || !seconds.insert(y).second) check.injective = false;
      if (!seen.insert({x, y}).second || !space.within(x, y, r)) check.exact_cover = false;
      ++total;
    }
  }
  std::size_t edges = 0;
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t y = 0; y < space.size(); ++y)
      if (space.within(x, y, r)) ++edges;
  if (total != edges || seen.size() != edges) check.exact_cover = false;
  check.bound = 2 * ulf_profile(space, {r}).at(r) - 1;
  check.within_bound = dec.M() <= check.bound;
  return check;
}

Constants lower_bound_constants(std::size_t d) {
  const double k = static_cast<double>(d + 1);
  const double delta = 1.0 / (128.0 * k * k);
  return {delta, 1.0 / (8.0 * k), delta * delta * delta / 4.0};
}

ThresholdData threshold_setup(const DiagDimWitness& w) {
  ThresholdData td;
  td.d = w.d;
  td.constants = lower_bound_constants(w.d);
  const Element one = w.psi(unit_element(w.A()));
  const double scale = std::max(1.0, norm(one));
  for (std::size_t s = 0; s < one.size(); ++s)
    for (const auto& [k, b] : one[s].blocks())
      if (k.first != k.second && b.operatorNorm() > 1e-12 * scale)
        throw InvalidWitness("condition (4) violated: psi(1) is not in the canonical diagonal");

  const double cut = td.constants.delta + 1e-9;
  const long m = static_cast<long>(w.fiber);
  td.qhat = zero_element(w.F);
  td.q = zero_element(w.F);
  for (std::size_t s = 0; s < w.F.summands(); ++s) {
    Corner corner{w.summand_color[s], s, {}};
    for (std::size_t k = 0; k < w.F.summand_sizes[s]; ++k) {
      const Block* b = one[s].find(k, k);
      if (!b) continue;
      const auto eig = hermitian_eig(*b);
      Block proj = Block::Zero(m, m);
      for (long i = 0; i < m; ++i)
        if (eig.eigenvalues()(i) > cut) proj += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).adjoint();
      if (proj.norm() == 0.0) continue;
      td.qhat[s].set(k, k, proj);
      td.q[s].set(k, k, Block::Identity(m, m));
      corner.slots.push_back(k);
    }
    if (!corner.slots.empty()) {
      td.s_max = std::max(td.s_max, corner.slots.size());
      td.corners.push_back(std::move(corner));
    }
  }
  return td;
}

namespace {

// ||T 1_x T|| for T given blockwise: (column x of T)(row x of T).
double conjugate_point_norm(const BlockMatrix& t, std::size_t x) {
  std::vector<const Block*> col, row;
  for (const auto& [k, b] : t.blocks()) {
    if (k.second == x) col.push_back(&b);
    if (k.first == x) row.push_back(&b);
  }
  if (col.empty() || row.empty()) return 0.0;
  const long m = static_cast<long>(t.fiber());
  Block c(m * static_cast<long>(col.size()), m), r(m, m * static_cast<long>(row.size()));
  for (std::size_t i = 0; i < col.size(); ++i) c.middleRows(static_cast<long>(i) * m, m) = *col[i];
  for (std::size_t i = 0; i < row.size(); ++i) r.middleCols(static_cast<long>(i) * m, m) = *row[i];
  return rank_two_norm(r.adjoint(), c);
}

BlockMatrix point_sandwich(const BlockMatrix& t, std::size_t x) {
  std::vector<std::pair<std::size_t, const Block*>> col, row;
  for (const auto& [k, b] : t.blocks()) {
    if (k.second == x) col.emplace_back(k.first, &b);
    if (k.first == x) row.emplace_back(k.second, &b);
  }
  BlockMatrix out(t.nodes(), t.fiber());
  for (const auto& [y, by] : col)
    for (const auto& [z, bz] : row) out.accumulate(y, z, (*by) * (*bz));
  out.prune();
  return out;
}

double frobenius(const BlockMatrix& t) {
  double s = 0.0;
  for (const auto& [k, b] : t.blocks()) s += b.squaredNorm();
  return std::sqrt(s);
}

std::string corner_name(const Corner& c, std::size_t k, std::size_t l, const std::string& x) {
  std::ostringstream os;
  os << "(i=" << c.color << ", j=" << c.summand << ", k=" << k << ", l=" << l << ", x=" << x << ")";
  return os.str();
}

}  // namespace

PartialTranslationSystem build_translation_system(const DiagDimWitness& w, const ThresholdData& td) {
  PartialTranslationSystem pts;
  pts.space = w.space;
  pts.fiber = w.fiber;
  pts.d = w.d;
  pts.constants = td.constants;
  const double delta = td.constants.delta;
  const double eta2 = td.constants.eta * td.constants.eta;
  const auto fd = f_delta(delta);
  const auto gd = g_delta(delta);
  const long m = static_cast<long>(w.fiber);

  for (const Corner& corner : td.corners) {
    CornerSystem cs;
    cs.corner = corner;
    const std::size_t s = corner.slots.size();
    Element qc = zero_element(w.F);
    for (auto k : corner.slots) qc[corner.summand].set(k, k, Block::Identity(m, m));
    const BlockMatrix h = w.phi(qc)[0];
    const double top = operator_norm(h);
    const double cut = 1e-12 * top;
    // f(h) h^+ as one spectral function keeps the kernel of h exact.
    const BlockMatrix gf = hermitian_function(h, [&](double t) { return t > cut ? fd(t) / t : 0.0; });
    const BlockMatrix gg = hermitian_function(h, [&](double t) { return t > cut ? gd(t) / t : 0.0; });
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b) {
        const BlockMatrix img = w.phi(generalized_unit(w.F, corner.summand, corner.slots[a], corner.slots[b]))[0];
        cs.f_units.push_back(gf * img);
        cs.g_units.push_back(gg * img);
      }
    cs.U.resize(s);
    for (std::size_t a = 0; a < s; ++a) {
      const BlockMatrix& faa = cs.f_units[a * s + a];
      std::set<std::size_t> cols;
      for (const auto& [k, b] : faa.blocks()) cols.insert(k.second);
      for (std::size_t x : cols) {
        const double v = conjugate_point_norm(faa, x);
        if (std::abs(v - eta2) <= 1e-9)
          pts.warnings.push_back("borderline threshold at " + corner_name(corner, a, a, w.space->ids()[x]));
        if (v > eta2) cs.U[a].push_back(x);
      }
    }
    cs.sigma.resize(s * s);
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t x : cs.U[a]) {
        const BlockMatrix t = point_sandwich(cs.f_units[a * s + a], x);
        for (std::size_t b = 0; b < s; ++b) {
          const BlockMatrix& g = cs.g_units[b * s + a];
          const BlockMatrix xi = g * t * adjoint(g);
          double total = 0.0, best = -1.0;
          Key where{0, 0};
          for (const auto& [k, blk] : xi.blocks()) {
            const double n2 = blk.squaredNorm();
            total += n2;
            if (n2 > best) {
              best = n2;
              where = k;
            }
          }
          const std::string name = corner_name(corner, a, b, w.space->ids()[x]);
          if (total <= 0.0 || where.first != where.second || total - best > 1e-6 * total)
            throw AmbiguousSupport("conjugated operator is not supported on a single point at " + name);
          if (!std::binary_search(cs.U[b].begin(), cs.U[b].end(), where.first))
            throw AmbiguousSupport("support point leaves U_l at " + name);
          cs.sigma[a * s + b][x] = where.first;
        }
      }
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b)
        for (const auto& [x, y] : cs.sigma[a * s + b]) {
          auto back = cs.sigma[b * s + a].find(y);
          if (back == cs.sigma[b * s + a].end() || back->second != x) ++pts.round_trip_failures;
        }
    pts.corners.push_back(std::move(cs));
  }
  pts.identities = matrix_unit_identities(pts, 1e-8);
  return pts;
}

double IdentityReport::overall() const { return *std::max_element(worst.begin(), worst.end()); }

IdentityReport matrix_unit_identities(const PartialTranslationSystem& pts, double tol) {
  if (tol < 0) throw InvalidParameter("tolerance must be nonnegative");
  IdentityReport rep;
  auto positive_diagonal = [](const BlockMatrix& t) {
    double dev = 0.0;
    for (const auto& [k, b] : t.blocks())
      if (k.first != k.second) dev = std::max(dev, b.norm());
    dev = std::max(dev, frobenius(t - adjoint(t)));
    return std::max(dev, std::max(0.0, -min_eigenvalue(t)));
  };
  for (const auto& cs : pts.corners) {
    const std::size_t s = cs.s();
    const auto& F = cs.f_units;
    const auto& G = cs.g_units;
    for (std::size_t a = 0; a < s; ++a) {
      rep.worst[0] = std::max(rep.worst[0], positive_diagonal(F[a * s + a]));
      rep.worst[1] = std::max(rep.worst[1], positive_diagonal(G[a * s + a]));
      for (std::size_t b = 0; b < s; ++b) {
        rep.worst[2] = std::max(rep.worst[2], frobenius(adjoint(F[a * s + b]) - F[b * s + a]));
        rep.worst[3] = std::max(rep.worst[3], frobenius(adjoint(G[a * s + b]) - G[b * s + a]));
        for (std::size_t c = 0; c < s; ++c) {
          const BlockMatrix& target = F[a * s + c];
          rep.worst[4] = std::max(rep.worst[4], frobenius(F[a * s + b] * G[b * s + c] - target));
          rep.worst[4] = std::max(rep.worst[4], frobenius(G[a * s + b] * F[b * s + c] - target));
        }
      }
    }
  }
  return rep;
}

ExtractedCover extract_cover(const PartialTranslationSystem& pts, const FiniteMetricSpace& space, double r) {
  const std::size_t n = space.size();
  const std::size_t colors = pts.d + 1;
  struct Member {
    std::size_t corner, slot;
  };
  // membership[i][x]: the (corner, slot) pairs of color i whose U contains x
  std::vector<std::vector<std::vector<Member>>> membership(colors, std::vector<std::vector<Member>>(n));
  for (std::size_t c = 0; c < pts.corners.size(); ++c) {
    const auto& cs = pts.corners[c];
    for (std::size_t a = 0; a < cs.s(); ++a)
      for (std::size_t x : cs.U[a]) membership[cs.corner.color][x].push_back({c, a});
  }

  ExtractedCover out;
  const double three_quarters = 0.75;
  for (std::size_t x = 0; x < n; ++x) {
    bool covered = false;
    for (std::size_t i = 0; i < colors; ++i) covered = covered || !membership[i][x].empty();
    double mass = 0.0;
    for (std::size_t i = 0; i < colors; ++i) {
      Block sum = Block::Zero(static_cast<long>(pts.fiber), static_cast<long>(pts.fiber));
      for (const auto& cs : pts.corners)
        if (cs.corner.color == i)
          for (std::size_t a = 0; a < cs.s(); ++a)
            if (const Block* b = cs.f_units[a * cs.s() + a].find(x, x)) sum += *b;
      mass += sum.operatorNorm();
    }
    if (mass > three_quarters && !covered) ++out.cover_lemma_violations;
    if (!covered)
      throw CoverGap("point " + space.ids()[x] + " lies in no U; the witness error is too large for this scale",
                     space.ids()[x]);
  }

  const auto scale = space.scale(r);
  out.cover.scale_r = r;
  out.cover.families.resize(colors);
  out.class_sizes.resize(colors);
  for (const auto& cs : pts.corners) out.s_max = std::max(out.s_max, cs.s());
  for (std::size_t i = 0; i < colors; ++i) {
    std::vector<std::size_t> pts_i;
    for (std::size_t x = 0; x < n; ++x)
      if (!membership[i][x].empty()) pts_i.push_back(x);
    std::vector<std::size_t> parent(pts_i.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (std::size_t a = 0; a < pts_i.size(); ++a)
      for (std::size_t b = a; b < pts_i.size(); ++b) {
        const std::size_t z = pts_i[a], z2 = pts_i[b];
        if (!space.within(z, z2, scale)) continue;
        const std::size_t ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        // Every membership pair must satisfy z2 = sigma_{1,k'}(sigma_{k,1}(z)) in one corner.
        for (const auto& mz : membership[i][z])
          for (const auto& mz2 : membership[i][z2]) {
            bool ok = mz.corner == mz2.corner;
            if (ok) {
              const auto& cs = pts.corners[mz.corner];
              const std::size_t s = cs.s();
              auto to_first = cs.sigma[mz.slot * s + 0].find(z);
              ok = to_first != cs.sigma[mz.slot * s + 0].end();
              if (ok) {
                auto back = cs.sigma[0 * s + mz2.slot].find(to_first->second);
                ok = back != cs.sigma[0 * s + mz2.slot].end() && back->second == z2;
              }
            }
            if (!ok) ++out.recursion_violations;
          }
      }
    std::map<std::size_t, PointSet> classes;
    for (std::size_t a = 0; a < pts_i.size(); ++a) classes[find(a)].push_back(pts_i[a]);
    for (auto& [root, cls] : classes) {
      out.class_sizes[i].push_back(cls.size());
      out.S = std::max(out.S, cls.size());
      out.cover.families[i].push_back(std::move(cls));
    }
  }
  for (const auto& fam : out.cover.families)
    for (const auto& set : fam) out.cover.diam_bound_R = std::max(out.cover.diam_bound_R, set_diameter(space, set));
  out.report = verify_cover(out.cover, space, r);
  return out;
}

}  // namespace coarsedim
