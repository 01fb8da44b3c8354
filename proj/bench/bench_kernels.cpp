// Serial reference path vs OpenMP path for the hot kernels. Each row also
// checks that both paths return identical bits.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dmlab/bodies.hpp"
#include "dmlab/distortion.hpp"
#include "dmlab/ensembles.hpp"
#include "dmlab/events.hpp"
#include "dmlab/nets.hpp"
#include "dmlab/parallel.hpp"
#include "dmlab/processes.hpp"

using namespace dmlab;

namespace {

struct Kernel {
  std::string name;
  std::function<std::vector<double>(Exec)> run;
};

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

std::vector<double> flatten(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel timings"};
  int reps = 3, threads = 0;
  app.add_option("--reps", reps, "repetitions per path (best time is reported)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads for the parallel path (0 = default)");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_threads(threads);

  const auto cube = ConvexBody::cube(1024);
  const Matrix gamma = sample_matrix(EnsembleSpec{EnsembleKind::GaussianIID, 1024, 16}, 11);
  const FiniteIndexSet points(sample_matrix(EnsembleSpec{EnsembleKind::GaussianIID, 1000, 20, std::nullopt, VectorLayout::rows}, 12));
  const Matrix sparse = sample_matrix(EnsembleSpec{EnsembleKind::GaussianIID, 20, 200}, 13);
  const auto net = build_sphere_net(6, 0.5, 50000, 14, 1000);

  const std::vector<Kernel> kernels = {
      {"mean_width cube1024 MC(20000)",
       [&](Exec e) { return std::vector<double>{mean_width(cube, WidthMethod::monte_carlo(20000, 1), e).ellK}; }},
      {"sup_samples gaussian 1000x20 (4000)",
       [&](Exec e) { return sup_samples(ProcessKind::gaussian, points, 4000, 2, e); }},
      {"measure_distortion cube1024 d16 multiStart(64)",
       [&](Exec e) {
         DistortionRequest req;
         req.seed = 3;
         const auto r = measure_distortion(cube, gamma, req, 1.0, e);
         return std::vector<double>{r.supEst, r.infEst};
       }},
      {"sparse_supremum 20x200 k=10 greedy(16)",
       [&](Exec e) { return std::vector<double>{sparse_supremum(sparse, 10, SparseMethod::greedy(16), 4, nullptr, e).value}; }},
      {"sample_product_operator n1024 m2048 d12",
       [&](Exec e) {
         ProductEnsembleSpec spec{EnsembleSpec{EnsembleKind::UniformPM1, 2048, 1024},
                                  EnsembleSpec{EnsembleKind::UniformPM1, 12, 2048}, 2048};
         return flatten(sample_product_operator(spec, 5, e));
       }},
      {"evaluate_on_net cube1024 d6", [&](Exec e) {
         const Matrix g6 = gamma.leftCols(6);
         const Vector v = evaluate_on_net(cube, g6, net.points, e);
         return std::vector<double>(v.data(), v.data() + v.size());
       }},
  };

  std::printf("threads=%d reps=%d\n", max_threads(), reps);
  std::printf("%-48s %12s %12s %8s %s\n", "kernel", "serial ms", "parallel ms", "speedup", "identical");
  bool allSame = true;
  for (const auto& k : kernels) {
    std::vector<double> a, b;
    const double ts = best_of(reps, [&] { a = k.run(Exec::serial); });
    const double tp = best_of(reps, [&] { b = k.run(Exec::parallel); });
    const bool same = a == b;
    allSame = allSame && same;
    std::printf("%-48s %12.2f %12.2f %8.2f %s\n", k.name.c_str(), ts, tp, ts / tp, same ? "yes" : "NO");
  }
  return allSame ? 0 : 1;
}
