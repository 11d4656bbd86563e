// Serial reference vs OpenMP kernels: ensemble runs, the exact DP and the
// Bellman lattice. Prints wall time for each and checks that results agree.

#include <chrono>
#include <cstdio>
#include <vector>

#include "erw/exact_dist.hpp"
#include "erw/large_dev.hpp"
#include "erw/parallel.hpp"
#include "erw/process_sim.hpp"

namespace {

template <class F>
double seconds(F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-10s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n", name, serial,
              parallel, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", erw::thread_count());
  const auto f = erw::UrnFunction::majority(3, 0.9);

  {
    erw::SimConfig cfg;
    cfg.horizon = 10000;
    cfg.seed = 7;
    erw::EnsembleSummary a, b;
    const double ts = seconds([&] { a = erw::run_ensemble_serial(f, cfg, 400); });
    const double tp = seconds([&] { b = erw::run_ensemble(f, cfg, 400); });
    report("ensemble", ts, tp, a.mean == b.mean && a.histogram == b.histogram);
  }
  {
    erw::DistributionTable a, b;
    const double ts = seconds([&] { a = erw::forward_distribution_serial(f, {}, 20000); });
    const double tp = seconds([&] { b = erw::forward_distribution(f, {}, 20000); });
    report("exact-dp", ts, tp, a.log_prob == b.log_prob);
  }
  {
    std::vector<double> ys;
    for (int i = 0; i <= 100; ++i) ys.push_back(i / 100.0);
    const erw::BellmanMesh mesh{400, 16000};
    erw::VariationalEntropy a, b;
    const double ts = seconds([&] { a = erw::entropy_variational_serial(f, ys, mesh); });
    const double tp = seconds([&] { b = erw::entropy_variational(f, ys, mesh); });
    report("bellman", ts, tp, a.phi == b.phi);
  }
  return 0;
}
