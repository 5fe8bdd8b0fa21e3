#pragma once

// Dense primal-dual interior-point solver for small semidefinite programs.
//
// Problems are stated over complex Hermitian PSD blocks with real linear
// constraints  <A, X> = Re tr(A X).  Internally each complex block of size n
// is embedded into a real symmetric block of size 2n,
//   X  ->  [[Re X, -Im X], [Im X, Re X]],
// inequality constraints get 1x1 slack blocks, and the resulting standard
// form pair
//   (P)  min <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
//   (D)  max b^T y    s.t.  C - sum_i y_i A_i = Z >= 0
// is solved with Nesterov-Todd scaling and a Mehrotra predictor-corrector.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sek/errors.hpp"
#include "sek/linalg.hpp"

namespace sek::sdp {

struct HermitianEntry {
  long row;
  long col;
  Complex value;
};

/// Sparse Hermitian coefficient matrix.  Entries list both triangles.
class SparseHermitian {
 public:
  explicit SparseHermitian(long dim = 0) : dim_(dim) {}

  long dim() const { return dim_; }
  const std::vector<HermitianEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Adds v at (row, col) and conj(v) at (col, row); a diagonal entry takes
  /// Re(v).
  SparseHermitian& add(long row, long col, Complex v) {
    if (row < 0 || col < 0 || row >= dim_ || col >= dim_)
      throw ArgumentError("SparseHermitian: entry out of range");
    if (row == col) {
      if (v.real() != 0.0) entries_.push_back({row, row, v.real()});
    } else if (v != Complex(0.0)) {
      entries_.push_back({row, col, v});
      entries_.push_back({col, row, std::conj(v)});
    }
    return *this;
  }

  /// Coefficient whose inner product with X is scale * Re X(i, j).
  static SparseHermitian re_entry(long dim, long i, long j, double scale = 1.0) {
    SparseHermitian a(dim);
    if (i == j) a.add(i, i, scale);
    else a.add(j, i, 0.5 * scale);
    return a;
  }

  /// Coefficient whose inner product with X is scale * Im X(i, j), i != j.
  static SparseHermitian im_entry(long dim, long i, long j, double scale = 1.0) {
    if (i == j) throw ArgumentError("im_entry on a diagonal entry");
    SparseHermitian a(dim);
    a.add(j, i, Complex(0.0, -0.5 * scale));
    return a;
  }

  static SparseHermitian identity(long dim, double scale = 1.0) {
    SparseHermitian a(dim);
    for (long i = 0; i < dim; ++i) a.add(i, i, scale);
    return a;
  }

  static SparseHermitian from_dense(const Matrix& h) {
    require_hermitian(h, 1e-9);
    SparseHermitian a(h.rows());
    for (long j = 0; j < h.cols(); ++j) {
      if (h(j, j).real() != 0.0) a.entries_.push_back({j, j, h(j, j).real()});
      for (long i = j + 1; i < h.rows(); ++i) {
        const Complex v = 0.5 * (h(i, j) + std::conj(h(j, i)));
        if (v != Complex(0.0)) {
          a.entries_.push_back({i, j, v});
          a.entries_.push_back({j, i, std::conj(v)});
        }
      }
    }
    return a;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (const auto& e : entries_) m(e.row, e.col) += e.value;
    return m;
  }

  /// Re tr(A X).
  double inner(const Matrix& x) const {
    double s = 0.0;
    for (const auto& e : entries_) s += (e.value * x(e.col, e.row)).real();
    return s;
  }

 private:
  long dim_;
  std::vector<HermitianEntry> entries_;
};

struct Term {
  std::size_t block;
  SparseHermitian coeff;
};

enum class Relation { equal, less_equal, greater_equal };
enum class Sense { minimize, maximize };

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::equal;
  double rhs = 0.0;
};

struct BlockSpec {
  std::string name;
  long dim;
};

/// Conic program over Hermitian PSD blocks.
class SdpProblem {
 public:
  std::size_t add_block(std::string name, long dim) {
    if (dim <= 0) throw ArgumentError("SDP block dimension must be positive");
    blocks_.push_back({std::move(name), dim});
    return blocks_.size() - 1;
  }

  void add_objective(std::size_t block, SparseHermitian coeff) {
    check_term(block, coeff);
    objective_.push_back({block, std::move(coeff)});
  }

  std::size_t add_constraint(std::vector<Term> terms, Relation relation,
                             double rhs) {
    for (const auto& t : terms) check_term(t.block, t.coeff);
    if (!std::isfinite(rhs)) throw ArgumentError("non-finite constraint rhs");
    constraints_.push_back({std::move(terms), relation, rhs});
    return constraints_.size() - 1;
  }

  void set_sense(Sense s) { sense_ = s; }
  Sense sense() const { return sense_; }
  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  const std::vector<Term>& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

 private:
  void check_term(std::size_t block, const SparseHermitian& coeff) const {
    if (block >= blocks_.size()) throw ArgumentError("unknown SDP block");
    if (coeff.dim() != blocks_[block].dim)
      throw ArgumentError("coefficient dimension does not match block '" +
                          blocks_[block].name + "'");
  }

  std::vector<BlockSpec> blocks_;
  std::vector<Term> objective_;
  std::vector<Constraint> constraints_;
  Sense sense_ = Sense::minimize;
};

enum class Status { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct SdpSolution {
  Status status = Status::numerical_failure;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;  // ||b - A(X)|| / (1 + ||b||)
  double dual_residual = 0.0;    // ||C - A^T y - Z|| / (1 + ||C||)
  int iterations = 0;
  std::vector<Matrix> block_values;
  /// Multipliers in the user's sense: for minimize, C - sum y_i A_i >= 0;
  /// for maximize, sum y_i A_i - C >= 0.
  std::vector<double> duals;
  std::vector<Matrix> dual_slacks;
  /// Farkas direction when infeasible (in the user's constraint indexing).
  std::vector<double> certificate;
  std::string message;
};

struct SolverOptions {
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  double accept_gap_tol = 1e-7;
  double accept_feas_tol = 1e-8;
  int max_iterations = 200;
  long max_total_dim = 128;
  /// When set, the embedded real problem is written here in SDPA sparse
  /// format before solving.
  std::string dump_path;
};

namespace detail {

struct RealEntry {
  int row;
  int col;
  double value;
};

struct RealPart {
  int block;
  std::vector<RealEntry> entries;
};

struct RealProblem {
  std::vector<int> dims;
  std::vector<RealMatrix> c;
  std::vector<std::vector<RealPart>> a;  // per constraint
  RealVector b;
  // block -> list of (constraint, part index)
  std::vector<std::vector<std::pair<int, int>>> touching;
};

inline void embed_entries(const SparseHermitian& coeff, int n, double scale,
                          std::vector<RealEntry>& out) {
  for (const auto& e : coeff.entries()) {
    const double re = 0.5 * scale * e.value.real();
    const double im = 0.5 * scale * e.value.imag();
    const int r = static_cast<int>(e.row);
    const int c = static_cast<int>(e.col);
    if (re != 0.0) {
      out.push_back({r, c, re});
      out.push_back({r + n, c + n, re});
    }
    if (im != 0.0) {
      out.push_back({r + n, c, im});
      out.push_back({r, c + n, -im});
    }
  }
}

inline RealProblem build_real(const SdpProblem& p) {
  RealProblem rp;
  const double sign = p.sense() == Sense::minimize ? 1.0 : -1.0;
  for (const auto& blk : p.blocks()) rp.dims.push_back(2 * static_cast<int>(blk.dim));
  const std::size_t n_user_blocks = rp.dims.size();
  for (const auto& con : p.constraints())
    if (con.relation != Relation::equal) rp.dims.push_back(1);

  for (int n : rp.dims) rp.c.push_back(RealMatrix::Zero(n, n));
  for (const auto& t : p.objective()) {
    std::vector<RealEntry> entries;
    const int n = static_cast<int>(p.blocks()[t.block].dim);
    embed_entries(t.coeff, n, sign, entries);
    for (const auto& e : entries) rp.c[t.block](e.row, e.col) += e.value;
  }

  rp.b.resize(static_cast<long>(p.constraints().size()));
  std::size_t slack = n_user_blocks;
  for (std::size_t i = 0; i < p.constraints().size(); ++i) {
    const auto& con = p.constraints()[i];
    std::vector<RealPart> parts;
    for (const auto& t : con.terms) {
      const int n = static_cast<int>(p.blocks()[t.block].dim);
      auto it = std::find_if(parts.begin(), parts.end(), [&](const RealPart& rp2) {
        return rp2.block == static_cast<int>(t.block);
      });
      if (it == parts.end()) {
        parts.push_back({static_cast<int>(t.block), {}});
        it = parts.end() - 1;
      }
      embed_entries(t.coeff, n, 1.0, it->entries);
    }
    if (con.relation != Relation::equal) {
      const double s = con.relation == Relation::less_equal ? 1.0 : -1.0;
      parts.push_back({static_cast<int>(slack++), {{0, 0, s}}});
    }
    rp.a.push_back(std::move(parts));
    rp.b(static_cast<long>(i)) = con.rhs;
  }

  rp.touching.resize(rp.dims.size());
  for (std::size_t i = 0; i < rp.a.size(); ++i)
    for (std::size_t k = 0; k < rp.a[i].size(); ++k)
      rp.touching[rp.a[i][k].block].push_back(
          {static_cast<int>(i), static_cast<int>(k)});
  return rp;
}

inline void write_sdpa(const RealProblem& rp, const std::string& path) {
  // SDPA sparse: min c^T x s.t. sum F_i x_i - F_0 >= 0, which is the dual
  // above with x = y, c = -b, F_i = -A_i, F_0 = -C.
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open SDP dump file '" + path + "'");
  out << std::setprecision(17);
  out << "* embedded real SDP, " << rp.a.size() << " constraints\n";
  out << rp.a.size() << "\n" << rp.dims.size() << "\n";
  for (std::size_t k = 0; k < rp.dims.size(); ++k)
    out << rp.dims[k] << (k + 1 < rp.dims.size() ? " " : "\n");
  for (long i = 0; i < rp.b.size(); ++i)
    out << -rp.b(i) << (i + 1 < rp.b.size() ? " " : "\n");
  for (std::size_t k = 0; k < rp.c.size(); ++k)
    for (int j = 0; j < rp.dims[k]; ++j)
      for (int i = 0; i <= j; ++i)
        if (rp.c[k](i, j) != 0.0)
          out << 0 << " " << k + 1 << " " << i + 1 << " " << j + 1 << " "
              << -rp.c[k](i, j) << "\n";
  for (std::size_t m = 0; m < rp.a.size(); ++m)
    for (const auto& part : rp.a[m]) {
      RealMatrix dense = RealMatrix::Zero(rp.dims[part.block], rp.dims[part.block]);
      for (const auto& e : part.entries) dense(e.row, e.col) += e.value;
      for (int j = 0; j < dense.cols(); ++j)
        for (int i = 0; i <= j; ++i)
          if (dense(i, j) != 0.0)
            out << m + 1 << " " << part.block + 1 << " " << i + 1 << " "
                << j + 1 << " " << -dense(i, j) << "\n";
    }
}

using Blocks = std::vector<RealMatrix>;

inline double inner(const Blocks& x, const Blocks& z) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k].cwiseProduct(z[k]).sum();
  return s;
}

inline double frobenius(const Blocks& x) { return std::sqrt(inner(x, x)); }

inline RealVector apply_a(const RealProblem& rp, const Blocks& x) {
  RealVector out(rp.b.size());
  for (std::size_t i = 0; i < rp.a.size(); ++i) {
    double s = 0.0;
    for (const auto& part : rp.a[i])
      for (const auto& e : part.entries) s += e.value * x[part.block](e.row, e.col);
    out(static_cast<long>(i)) = s;
  }
  return out;
}

inline Blocks apply_at(const RealProblem& rp, const RealVector& y) {
  Blocks out;
  for (int n : rp.dims) out.push_back(RealMatrix::Zero(n, n));
  for (std::size_t i = 0; i < rp.a.size(); ++i) {
    const double yi = y(static_cast<long>(i));
    if (yi == 0.0) continue;
    for (const auto& part : rp.a[i])
      for (const auto& e : part.entries) out[part.block](e.row, e.col) += yi * e.value;
  }
  return out;
}

inline RealMatrix sym(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

/// Largest alpha in (0, inf] with x + alpha dx >= 0, given chol(x) = l l^T.
inline double max_step(const Eigen::LLT<RealMatrix>& chol, const RealMatrix& dx) {
  const RealMatrix linv_dx =
      chol.matrixL().solve(chol.matrixL().solve(dx).transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym(linv_dx),
                                               Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct Scaling {
  RealMatrix r;     // X = R D R^T, Z = R^{-T} D R^{-1}
  RealMatrix rinv;
  RealMatrix w;     // W = R R^T, W Z W = X
  RealVector d;
};

inline bool nt_scaling(const RealMatrix& x, const RealMatrix& z, Scaling& s) {
  Eigen::LLT<RealMatrix> lx(x);
  if (lx.info() != Eigen::Success) return false;
  const RealMatrix l = lx.matrixL();
  const RealMatrix t = sym(l.transpose() * z * l);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(t);
  if (es.info() != Eigen::Success) return false;
  const RealVector theta = es.eigenvalues();
  if (theta.minCoeff() <= 0.0) return false;
  const RealVector q4 = theta.array().pow(-0.25);
  const RealVector q4inv = theta.array().pow(0.25);
  s.r = l * es.eigenvectors() * q4.asDiagonal();
  const RealMatrix linv = l.triangularView<Eigen::Lower>().solve(
      RealMatrix::Identity(l.rows(), l.cols()));
  s.rinv = q4inv.asDiagonal() * es.eigenvectors().transpose() * linv;
  s.w = sym(s.r * s.r.transpose());
  s.d = theta.array().sqrt();
  return true;
}

inline Matrix unembed(const RealMatrix& x) {
  const long n = x.rows() / 2;
  const RealMatrix re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const RealMatrix im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  Matrix out(n, n);
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < n; ++i) out(i, j) = Complex(re(i, j), im(i, j));
  return hermitize(out);
}

}  // namespace detail

/// Solves the program.  Never throws for numerical trouble; the status field
/// carries the outcome.
inline SdpSolution solve(const SdpProblem& problem,
                         const SolverOptions& options = {}) {
  using namespace detail;
  long total_dim = 0;
  for (const auto& blk : problem.blocks()) total_dim += 2 * blk.dim;
  for (const auto& con : problem.constraints())
    if (con.relation != Relation::equal) total_dim += 1;
  if (total_dim > options.max_total_dim)
    throw CapacityError("SDP variable dimension " + std::to_string(total_dim) +
                        " exceeds cap " + std::to_string(options.max_total_dim));

  const RealProblem rp = build_real(problem);
  if (!options.dump_path.empty()) write_sdpa(rp, options.dump_path);

  const std::size_t nb = rp.dims.size();
  const long m = rp.b.size();
  int n_total = 0;
  for (int n : rp.dims) n_total += n;

  SdpSolution sol;
  const double sign = problem.sense() == Sense::minimize ? 1.0 : -1.0;

  // Initial point (SDPT3-style magnitudes).
  double norm_c = 0.0;
  for (const auto& c : rp.c) norm_c += c.squaredNorm();
  norm_c = std::sqrt(norm_c);
  double xi_p = 10.0, max_a = 0.0;
  for (long i = 0; i < m; ++i) {
    double na = 0.0;
    for (const auto& part : rp.a[i])
      for (const auto& e : part.entries) na += e.value * e.value;
    na = std::sqrt(na);
    max_a = std::max(max_a, na);
    for (const auto& part : rp.a[i])
      xi_p = std::max(xi_p, rp.dims[part.block] * (1.0 + std::abs(rp.b(i))) /
                                (1.0 + na));
  }
  xi_p = std::max(xi_p, std::sqrt(static_cast<double>(n_total)));
  const double xi_d = std::max({10.0, std::sqrt(static_cast<double>(n_total)),
                                norm_c, max_a});

  Blocks x, z;
  for (int n : rp.dims) {
    x.push_back(xi_p * RealMatrix::Identity(n, n));
    z.push_back(xi_d * RealMatrix::Identity(n, n));
  }
  RealVector y = RealVector::Zero(m);
  const double norm_b = rp.b.norm();

  auto finish = [&](Status status, const std::string& message) {
    sol.status = status;
    sol.message = message;
    const double pobj = inner(rp.c, x);
    const double dobj = rp.b.dot(y);
    sol.primal_value = sign * pobj;
    sol.dual_value = sign * dobj;
    sol.gap = std::abs(pobj - dobj);
    sol.block_values.clear();
    sol.dual_slacks.clear();
    for (std::size_t k = 0; k < problem.blocks().size(); ++k) {
      sol.block_values.push_back(unembed(x[k]));
      sol.dual_slacks.push_back(2.0 * unembed(z[k]));
    }
    sol.duals.resize(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i) sol.duals[i] = sign * y(i);
    return sol;
  };

  // Best iterate meeting the acceptance tolerances.  Near the optimum the
  // iterates can lose centrality and break down a few steps after they were
  // already good enough.
  struct Snapshot {
    Blocks x, z;
    RealVector y;
    double gap, pinf, dinf;
  };
  std::optional<Snapshot> best;
  auto fallback = [&](bool acceptable, const std::string& message) {
    if (acceptable) return finish(Status::optimal, message);
    if (!best) return finish(Status::numerical_failure, message);
    x = best->x;
    y = best->y;
    z = best->z;
    SdpSolution out = finish(Status::optimal, message + "; returned best acceptable iterate");
    out.primal_residual = best->pinf;
    out.dual_residual = best->dinf;
    return out;
  };

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    sol.iterations = iter;
    const RealVector ax = apply_a(rp, x);
    const RealVector rpv = rp.b - ax;
    const Blocks aty = apply_at(rp, y);
    Blocks rd(nb);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = rp.c[k] - aty[k] - z[k];
    const double pobj = inner(rp.c, x);
    const double dobj = rp.b.dot(y);
    const double pinf = rpv.norm() / (1.0 + norm_b);
    const double dinf = frobenius(rd) / (1.0 + norm_c);
    const double xz = inner(x, z);
    const double rel_gap =
        std::max(std::abs(pobj - dobj), std::abs(xz)) / (1.0 + std::abs(pobj));
    sol.primal_residual = pinf;
    sol.dual_residual = dinf;
    if (std::getenv("SEK_SDP_TRACE"))
      std::fprintf(stderr, "it %3d pobj %.12e dobj %.12e pinf %.2e dinf %.2e gap %.2e\n",
                   iter, pobj, dobj, pinf, dinf, rel_gap);

    if (pinf <= options.feas_tol && dinf <= options.feas_tol &&
        rel_gap <= options.gap_tol)
      return finish(Status::optimal, "converged");

    // Farkas certificates.
    if (dobj > 0.0 && pinf > options.feas_tol) {
      const RealVector yc = y / dobj;
      const Blocks cert = apply_at(rp, -yc);
      double lmin = INFINITY, scale = 1.0;
      for (const auto& blk : cert) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym(blk), Eigen::EigenvaluesOnly);
        lmin = std::min(lmin, es.eigenvalues().minCoeff());
        scale = std::max(scale, blk.cwiseAbs().maxCoeff());
      }
      if (lmin >= -1e-10 * scale && yc.norm() < 1e12) {
        sol.certificate.assign(yc.data(), yc.data() + m);
        for (auto& v : sol.certificate) v *= sign;
        return finish(Status::infeasible, "primal infeasible (Farkas certificate)");
      }
    }
    if (pobj < 0.0 && dinf > options.feas_tol) {
      Blocks xc = x;
      for (auto& blk : xc) blk /= -pobj;
      if (apply_a(rp, xc).norm() <= 1e-10 * (1.0 + max_a))
        return finish(Status::unbounded, "dual infeasible (primal ray)");
    }

    const bool acceptable = pinf <= options.accept_feas_tol &&
                            dinf <= options.accept_feas_tol &&
                            rel_gap <= options.accept_gap_tol;
    if (acceptable && (!best || rel_gap < best->gap)) best = Snapshot{x, z, y, rel_gap, pinf, dinf};
    if (iter == options.max_iterations) return fallback(acceptable, "iteration cap reached");
    if (frobenius(x) > 1e14 || frobenius(z) > 1e14) return fallback(false, "iterates diverged");

    // Scaling and Schur complement.
    std::vector<Scaling> sc(nb);
    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) ok = nt_scaling(x[k], z[k], sc[k]);
    if (!ok)
      return fallback(acceptable, "lost positive definiteness");

    RealMatrix schur = RealMatrix::Zero(m, m);
    for (std::size_t k = 0; k < nb; ++k) {
      const RealMatrix& w = sc[k].w;
      const auto& touch = rp.touching[k];
      RealMatrix g(rp.dims[k], rp.dims[k]);
      for (std::size_t jj = 0; jj < touch.size(); ++jj) {
        const auto [j, pj] = touch[jj];
        g.setZero();
        for (const auto& e : rp.a[j][pj].entries)
          g.noalias() += e.value * w.col(e.row) * w.row(e.col);
        for (std::size_t ii = jj; ii < touch.size(); ++ii) {
          const auto [i, pi] = touch[ii];
          double s = 0.0;
          for (const auto& e : rp.a[i][pi].entries) s += e.value * g(e.row, e.col);
          schur(i, j) += s;
        }
      }
    }
    schur = schur.selfadjointView<Eigen::Lower>();
    Eigen::LLT<RealMatrix> schur_llt(schur);
    Eigen::LDLT<RealMatrix> schur_ldlt;
    bool use_ldlt = false;
    if (schur_llt.info() != Eigen::Success) {
      const double reg = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      schur_ldlt.compute(schur + reg * RealMatrix::Identity(m, m));
      use_ldlt = true;
      if (schur_ldlt.info() != Eigen::Success)
        return fallback(acceptable, "Schur complement factorization failed");
    }
    auto schur_solve = [&](const RealVector& rhs) -> RealVector {
      return use_ldlt ? RealVector(schur_ldlt.solve(rhs))
                      : RealVector(schur_llt.solve(rhs));
    };

    // W Rd W is shared by both solves.
    Blocks wrdw(nb);
    for (std::size_t k = 0; k < nb; ++k) wrdw[k] = sym(sc[k].w * rd[k] * sc[k].w);
    const RealVector a_wrdw = apply_a(rp, wrdw);

    auto direction = [&](const Blocks& h, Blocks& dx, RealVector& dy, Blocks& dz) {
      Blocks p(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const RealVector& d = sc[k].d;
        RealMatrix t(d.size(), d.size());
        for (long j = 0; j < d.size(); ++j)
          for (long i = 0; i < d.size(); ++i)
            t(i, j) = 2.0 * h[k](i, j) / (d(i) + d(j));
        p[k] = sym(sc[k].r * t * sc[k].r.transpose());
      }
      dy = schur_solve(rpv - apply_a(rp, p) + a_wrdw);
      dz.resize(nb);
      dx.resize(nb);
      // A few rounds of iterative refinement against the actual primal
      // residual; the Schur complement is badly conditioned near the end.
      for (int round = 0;; ++round) {
        const Blocks atdy = apply_at(rp, dy);
        for (std::size_t k = 0; k < nb; ++k) {
          dz[k] = sym(rd[k] - atdy[k]);
          dx[k] = sym(p[k] - sc[k].w * dz[k] * sc[k].w);
        }
        if (round == 3) break;
        const RealVector res = rpv - apply_a(rp, dx);
        if (res.norm() <= 1e-15 * (1.0 + norm_b)) break;
        dy += schur_solve(res);
      }
    };

    std::vector<Eigen::LLT<RealMatrix>> chol_x(nb), chol_z(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      chol_x[k].compute(x[k]);
      chol_z[k].compute(z[k]);
    }
    auto step_lengths = [&](const Blocks& dx, const Blocks& dz) {
      double ap = INFINITY, ad = INFINITY;
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(chol_x[k], dx[k]));
        ad = std::min(ad, max_step(chol_z[k], dz[k]));
      }
      return std::pair{ap, ad};
    };

    const double mu = xz / n_total;

    // Predictor.
    Blocks h(nb);
    for (std::size_t k = 0; k < nb; ++k)
      h[k] = -RealMatrix(sc[k].d.array().square().matrix().asDiagonal());
    Blocks dx_a, dz_a;
    RealVector dy_a;
    direction(h, dx_a, dy_a, dz_a);
    auto [ap_max, ad_max] = step_lengths(dx_a, dz_a);
    const double ap_a = std::min(1.0, ap_max);
    const double ad_a = std::min(1.0, ad_max);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      mu_aff += (x[k] + ap_a * dx_a[k]).cwiseProduct(z[k] + ad_a * dz_a[k]).sum();
    mu_aff /= n_total;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    for (std::size_t k = 0; k < nb; ++k) {
      const RealMatrix dxs = sc[k].rinv * dx_a[k] * sc[k].rinv.transpose();
      const RealMatrix dzs = sc[k].r.transpose() * dz_a[k] * sc[k].r;
      h[k] = sigma * mu * RealMatrix::Identity(rp.dims[k], rp.dims[k]) -
             RealMatrix(sc[k].d.array().square().matrix().asDiagonal()) -
             sym(dxs * dzs);
    }
    Blocks dx, dz;
    RealVector dy;
    direction(h, dx, dy, dz);
    auto [ap2, ad2] = step_lengths(dx, dz);
    const double gamma = 0.9 + 0.09 * std::min(ap_a, ad_a);
    const double ap = std::min(1.0, gamma * ap2);
    const double ad = std::min(1.0, gamma * ad2);
    if (ap < 1e-10 && ad < 1e-10)
      return fallback(acceptable, "step length collapsed");

    for (std::size_t k = 0; k < nb; ++k) {
      x[k] = sym(x[k] + ap * dx[k]);
      z[k] = sym(z[k] + ad * dz[k]);
    }
    y += ad * dy;
  }
  return finish(Status::numerical_failure, "iteration cap reached");
}

}  // namespace sek::sdp
