#include "dmlab/ensembles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dmlab/rng.hpp"

namespace dmlab {

namespace {

constexpr double kStudentDof = 12.0;
constexpr double kHeavyRadius = 100.0;

void draw_vector(EnsembleKind kind, Rng& rng, Eigen::Ref<Vector> out) {
  const Index dim = out.size();
  switch (kind) {
    case EnsembleKind::GaussianIID: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index i = 0; i < dim; ++i) out[i] = normal(rng);
      return;
    }
    case EnsembleKind::SphericalRows:
      out = unit_sphere_point(rng, dim) * std::sqrt(static_cast<double>(dim));
      return;
    case EnsembleKind::UniformPM1:
    case EnsembleKind::UniformIsotropic: {
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      const double scale = kind == EnsembleKind::UniformIsotropic ? std::sqrt(3.0) : 1.0;
      for (Index i = 0; i < dim; ++i) out[i] = scale * uniform(rng);
      return;
    }
    case EnsembleKind::RademacherIID: {
      std::bernoulli_distribution coin(0.5);
      for (Index i = 0; i < dim; ++i) out[i] = coin(rng) ? 1.0 : -1.0;
      return;
    }
    case EnsembleKind::LogConcaveSimplex: {
      // (E_1..E_dim) / (E_1 + ... + E_{dim+1}) with random signs is uniform on B_1^dim.
      std::exponential_distribution<double> expo(1.0);
      std::bernoulli_distribution coin(0.5);
      double total = 0.0;
      for (Index i = 0; i < dim; ++i) {
        out[i] = expo(rng);
        total += out[i];
      }
      total += expo(rng);
      const double d = static_cast<double>(dim);
      const double radius = std::sqrt((d + 1.0) * (d + 2.0) / 2.0);
      for (Index i = 0; i < dim; ++i) out[i] = (coin(rng) ? radius : -radius) * out[i] / total;
      return;
    }
    case EnsembleKind::HeavyTailedBounded: {
      std::student_t_distribution<double> student(kStudentDof);
      const double unit = std::sqrt((kStudentDof - 2.0) / kStudentDof);
      const double cap = kHeavyRadius * std::sqrt(static_cast<double>(dim));
      do {
        for (Index i = 0; i < dim; ++i) out[i] = unit * student(rng);
      } while (out.norm() > cap);
      return;
    }
  }
}

void validate(const EnsembleSpec& spec) {
  require(spec.rows >= 1 && spec.cols >= 1, "sample_matrix: rows and cols must be positive");
  require(spec.rows <= std::numeric_limits<Index>::max() / spec.cols, "sample_matrix: rows*cols overflows");
  if (spec.rowScale) require(std::isfinite(*spec.rowScale), "sample_matrix: rowScale must be finite");
}

}  // namespace

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::GaussianIID: return "GaussianIID";
    case EnsembleKind::SphericalRows: return "SphericalRows";
    case EnsembleKind::UniformPM1: return "UniformPM1";
    case EnsembleKind::UniformIsotropic: return "UniformIsotropic";
    case EnsembleKind::RademacherIID: return "RademacherIID";
    case EnsembleKind::LogConcaveSimplex: return "LogConcaveSimplex";
    case EnsembleKind::HeavyTailedBounded: return "HeavyTailedBounded";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  for (auto k : {EnsembleKind::GaussianIID, EnsembleKind::SphericalRows, EnsembleKind::UniformPM1,
                 EnsembleKind::UniformIsotropic, EnsembleKind::RademacherIID, EnsembleKind::LogConcaveSimplex,
                 EnsembleKind::HeavyTailedBounded})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown ensemble kind '" + name + "'");
}

bool is_isotropic(EnsembleKind kind) { return kind != EnsembleKind::UniformPM1; }

Matrix sample_matrix(const EnsembleSpec& spec, std::uint64_t seed, Exec exec) {
  validate(spec);
  Matrix out(spec.rows, spec.cols);
  const Index count = spec.vector_count();
  const Index dim = spec.vector_dim();
  for_each_index(exec, static_cast<std::size_t>(count), [&](std::size_t i) {
    Rng rng = stream(seed, i);
    Vector v(dim);
    draw_vector(spec.kind, rng, v);
    if (spec.layout == VectorLayout::rows)
      out.row(static_cast<Index>(i)) = v.transpose();
    else
      out.col(static_cast<Index>(i)) = v;
  });
  if (spec.rowScale) out *= *spec.rowScale;
  return out;
}

Matrix product_operator(const Matrix& gamma1, const Matrix& gamma2) {
  require(gamma1.rows() == gamma2.cols(), "product_operator: Gamma_1 rows must equal Gamma_2 cols (m)");
  return gamma1.transpose() * gamma2.transpose();
}

namespace {

constexpr Index kProductChunk = 256;

EnsembleSpec z_spec(const ProductEnsembleSpec& spec) {
  EnsembleSpec zs = spec.rowSpec;
  zs.rows = spec.m;
  zs.layout = VectorLayout::rows;
  return zs;
}

EnsembleSpec x_spec(const ProductEnsembleSpec& spec) {
  EnsembleSpec xs = spec.colSpec;
  xs.cols = spec.m;
  xs.layout = VectorLayout::columns;
  return xs;
}

// Rows [begin, begin + count) of Gamma_1, drawn exactly as sample_matrix would.
Matrix gamma1_rows(const EnsembleSpec& zs, std::uint64_t seed, Index begin, Index count, Index m, Exec exec) {
  Matrix out(count, zs.cols);
  for_each_index(exec, static_cast<std::size_t>(count), [&](std::size_t i) {
    Rng rng = stream(seed, static_cast<std::uint64_t>(begin) + i);
    Vector v(zs.cols);
    draw_vector(zs.kind, rng, v);
    out.row(static_cast<Index>(i)) = v.transpose();
  });
  if (zs.rowScale) out *= *zs.rowScale;
  return out / std::sqrt(static_cast<double>(m));
}

// Gamma accumulated over fixed row blocks of Gamma_1, so the full m x n
// factor never has to be held at once.
template <class RowBlock>
Matrix accumulate_gamma(const Matrix& gamma2, Index n, Index m, RowBlock&& block) {
  Matrix gamma = Matrix::Zero(n, gamma2.rows());
  for (Index begin = 0; begin < m; begin += kProductChunk) {
    const Index count = std::min(kProductChunk, m - begin);
    gamma.noalias() += block(begin, count).transpose() * gamma2.middleCols(begin, count).transpose();
  }
  return gamma;
}

}  // namespace

ProductSample sample_product(const ProductEnsembleSpec& spec, std::uint64_t seed, Exec exec) {
  require(spec.m >= 1, "sample_product: m must be positive");
  ProductSample s;
  s.gamma1 = sample_matrix(z_spec(spec), mix_seed(seed, 0), exec) / std::sqrt(static_cast<double>(spec.m));
  s.gamma2 = sample_matrix(x_spec(spec), mix_seed(seed, 1), exec);
  s.gamma = accumulate_gamma(s.gamma2, spec.n(), spec.m,
                             [&](Index begin, Index count) { return s.gamma1.middleRows(begin, count); });
  return s;
}

Matrix sample_product_operator(const ProductEnsembleSpec& spec, std::uint64_t seed, Exec exec) {
  require(spec.m >= 1, "sample_product: m must be positive");
  const EnsembleSpec zs = z_spec(spec);
  validate(zs);
  const Matrix gamma2 = sample_matrix(x_spec(spec), mix_seed(seed, 1), exec);
  return accumulate_gamma(gamma2, spec.n(), spec.m, [&](Index begin, Index count) {
    return gamma1_rows(zs, mix_seed(seed, 0), begin, count, spec.m, exec);
  });
}

MarginalDiagnostics marginal_diagnostics(const EnsembleSpec& spec, std::size_t probeDirections, std::size_t trials,
                                         std::uint64_t seed, const DiagnosticsOptions& options, Exec exec) {
  require(trials >= 1000, "marginal_diagnostics: trials must be >= 1000");
  require(probeDirections >= 1, "marginal_diagnostics: probeDirections must be >= 1");
  require(options.q > 2.0, "marginal_diagnostics: q must exceed 2");

  const Index dim = spec.vector_dim();
  EnsembleSpec draw = spec;
  draw.layout = VectorLayout::columns;
  draw.rows = dim;
  draw.cols = static_cast<Index>(trials);
  const Matrix samples = sample_matrix(draw, mix_seed(seed, 0), exec);

  Matrix probes(dim, static_cast<Index>(probeDirections) + 2);
  probes.col(0) = Vector::Unit(dim, 0);
  probes.col(1) = Vector::Ones(dim) / std::sqrt(static_cast<double>(dim));
  Rng rng = stream(seed, 1);
  for (std::size_t j = 0; j < probeDirections; ++j) probes.col(static_cast<Index>(j) + 2) = unit_sphere_point(rng, dim);

  MarginalDiagnostics out;
  out.dim = dim;
  out.trials = trials;
  out.probes = static_cast<std::size_t>(probes.cols());
  out.q = options.q;
  out.paourisC1 = options.paourisC1;
  for (int p : {2, 4, 8, 16})
    if (trials >= 200u * static_cast<unsigned>(p)) out.probedP.push_back(p);

  const Matrix marginals = samples.transpose() * probes;  // trials x probes
  const double n = static_cast<double>(trials);

  struct ProbeStats {
    double mean_z = 0.0, psi2 = 0.0, lq = 0.0;
    std::vector<double> small;
  };
  auto stats = map_indices<ProbeStats>(exec, static_cast<std::size_t>(probes.cols()), [&](std::size_t j) {
    const auto xi = marginals.col(static_cast<Index>(j));
    ProbeStats s;
    const double mean = xi.mean();
    const double var = (xi.array() - mean).square().sum() / (n - 1.0);
    s.mean_z = var > 0.0 ? std::abs(mean) / std::sqrt(var / n) : 0.0;
    const double l2 = std::sqrt(xi.array().square().mean());
    for (int p : out.probedP) {
      const double lp = std::pow(xi.array().abs().pow(p).mean(), 1.0 / p);
      s.psi2 = std::max(s.psi2, lp / std::sqrt(static_cast<double>(p)));
    }
    s.lq = l2 > 0.0 ? std::pow(xi.array().abs().pow(options.q).mean(), 1.0 / options.q) / l2 : 0.0;
    for (double kappa : options.kappaGrid) s.small.push_back((xi.array().abs() <= kappa).cast<double>().mean());
    return s;
  });

  for (double kappa : options.kappaGrid) out.smallBallTable[kappa] = 0.0;
  for (const auto& s : stats) {
    out.maxMarginalMean = std::max(out.maxMarginalMean, s.mean_z);
    out.psi2Estimate = std::max(out.psi2Estimate, s.psi2);
    out.lqL2Ratio = std::max(out.lqL2Ratio, s.lq);
    for (std::size_t k = 0; k < options.kappaGrid.size(); ++k) {
      double& slot = out.smallBallTable[options.kappaGrid[k]];
      slot = std::max(slot, s.small[k]);
    }
  }

  const Matrix second = samples * samples.transpose() / n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second - Matrix::Identity(dim, dim), Eigen::EigenvaluesOnly);
  out.isotropyError = eig.eigenvalues().cwiseAbs().maxCoeff();

  const Vector norms = samples.colwise().norm().transpose();
  for (double u : options.uGrid) {
    const double threshold = options.paourisC1 * u * std::sqrt(static_cast<double>(dim));
    out.normTail[u] = (norms.array() >= threshold).cast<double>().mean();
  }
  return out;
}

}  // namespace dmlab
