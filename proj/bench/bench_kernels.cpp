// Serial vs OpenMP timings for the Choi assembly and Bayes residual kernels.
//   bench_kernels [repeat]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "qbayes/kernels.hpp"

using qbayes::CMatrix;
namespace k = qbayes::kernels;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n;
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = {n(rng), n(rng)};
  return m;
}

template <class F>
double time_us(int repeat, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeat; ++r) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::micro>(t1 - t0).count() / repeat;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeat = std::max(1, argc > 1 ? std::atoi(argv[1]) : 5);
  std::mt19937_64 rng(42);
  bool ok = true;

  std::printf("threads=%d repeat=%d\n", omp_get_max_threads(), repeat);
  std::printf("%-10s %4s %4s %12s %12s %8s %10s\n", "kernel", "n", "m", "serial_us", "parallel_us", "speedup",
              "max_diff");

  for (std::size_t d : {4, 8, 16, 24}) {
    std::vector<CMatrix> kraus;
    for (int a = 0; a < 4; ++a) kraus.push_back(random_matrix(rng, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
    CMatrix cs, cp;
    const double ts = time_us(repeat, [&] { cs = k::choi_from_kraus_serial(kraus, d, d); });
    const double tp = time_us(repeat, [&] { cp = k::choi_from_kraus_parallel(kraus, d, d); });
    const double diff = (cs - cp).cwiseAbs().maxCoeff();
    ok = ok && diff <= 1e-10 * std::max(1.0, cs.cwiseAbs().maxCoeff());
    std::printf("%-10s %4zu %4zu %12.1f %12.1f %8.2f %10.2e\n", "choi", d, d, ts, tp, ts / tp, diff);
  }

  for (std::size_t d : {2, 4, 6, 8}) {
    const auto di = static_cast<Eigen::Index>(d);
    const CMatrix choi_g = random_matrix(rng, di * di, di * di);
    const CMatrix choi_f = random_matrix(rng, di * di, di * di);
    const CMatrix sigma = random_matrix(rng, di, di);
    const CMatrix rho = random_matrix(rng, di, di);
    double rs = 0.0, rp = 0.0;
    const double ts = time_us(repeat, [&] { rs = k::bayes_residual_serial(choi_g, choi_f, sigma, rho); });
    const double tp = time_us(repeat, [&] { rp = k::bayes_residual_parallel(choi_g, choi_f, sigma, rho); });
    const double diff = std::abs(rs - rp);
    ok = ok && diff <= 1e-10 * std::max(1.0, rs);
    std::printf("%-10s %4zu %4zu %12.1f %12.1f %8.2f %10.2e\n", "residual", d, d, ts, tp, ts / tp, diff);
  }

  std::printf("%s\n", ok ? "PASS" : "FAIL: serial and parallel kernels disagree");
  return ok ? 0 : 1;
}
