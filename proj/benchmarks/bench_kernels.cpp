// Timing comparison of the serial reference kernels against the OpenMP
// variants, with a bitwise equality check on every pair.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "shapedist/kernels.hpp"
#include "shapedist/matrix.hpp"
#include "shapedist/moments.hpp"
#include "shapedist/response.hpp"
#include "shapedist/rng.hpp"

using namespace shapedist;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

double time_of(const std::function<void()>& fn, int reps) {
  using clock = std::chrono::steady_clock;
  fn();  // warm up
  const auto start = clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(clock::now() - start).count() / reps;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

void print_row(const std::string& name, double serial_s, double parallel_s, bool match) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.2fx  %s\n", name.c_str(), serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s, match ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  Rng rng(2718);
  const int threads = kernels::default_threads();
  std::printf("threads: %d\n", threads);
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    const Matrix a = random_matrix(4096, 96, rng);
    const Matrix b = random_matrix(4096, 96, rng);
    const Matrix ref = kernels::at_b_scaled_serial(a, b, 1.0 / 4096.0);
    const Matrix par = kernels::at_b_scaled(a, b, 1.0 / 4096.0);
    const double ts = time_of([&] { kernels::at_b_scaled_serial(a, b, 1.0 / 4096.0); }, 5);
    const double tp = time_of([&] { kernels::at_b_scaled(a, b, 1.0 / 4096.0); }, 5);
    print_row("cross covariance 4096x96", ts, tp, bitwise_equal(ref, par));
  }
  {
    const Matrix x = random_matrix(1024, 64, rng);
    const Matrix ref = kernels::row_gram_serial(x);
    const Matrix par = kernels::row_gram(x);
    const double ts = time_of([&] { kernels::row_gram_serial(x); }, 5);
    const double tp = time_of([&] { kernels::row_gram(x); }, 5);
    print_row("row gram 1024x64", ts, tp, bitwise_equal(ref, par));
  }
  {
    const Matrix a = random_matrix(512, 512, rng);
    const Matrix b = random_matrix(512, 512, rng);
    const Matrix ref = kernels::matmul_serial(a, b);
    const Matrix par = kernels::matmul(a, b);
    const double ts = time_of([&] { kernels::matmul_serial(a, b); }, 3);
    const double tp = time_of([&] { kernels::matmul(a, b); }, 3);
    print_row("matmul 512x512", ts, tp, bitwise_equal(ref, par));
  }
  {
    const ResponseMatrix x = make_response(random_matrix(256, 32, rng));
    const ResponseMatrix y = make_response(random_matrix(256, 32, rng));
    const GramPair g = gram_pair(x, y);
    const auto strategy = MomentStrategy::monte_carlo(200000, 99);
    const double ref = eigenmoment(3, g, strategy, 1);
    const double par = eigenmoment(3, g, strategy, threads);
    const double ts = time_of([&] { eigenmoment(3, g, strategy, 1); }, 3);
    const double tp = time_of([&] { eigenmoment(3, g, strategy, threads); }, 3);
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx  %s\n", "eigenmoment p=3, 200k tuples",
                ts * 1e3, tp * 1e3, ts / tp, ref == par ? "bitwise-equal" : "MISMATCH");
  }
  {
    const ResponseMatrix x = make_response(random_matrix(128, 24, rng));
    const ResponseMatrix y = make_response(random_matrix(128, 24, rng));
    const double ts = time_of(
        [&] { bootstrap_moment_covariance(x, y, 4, 1.0, 100, 7, 3000, 1); }, 2);
    const double tp = time_of(
        [&] { bootstrap_moment_covariance(x, y, 4, 1.0, 100, 7, 3000, threads); }, 2);
    const auto ref = bootstrap_moment_covariance(x, y, 4, 1.0, 100, 7, 3000, 1);
    const auto par = bootstrap_moment_covariance(x, y, 4, 1.0, 100, 7, 3000, threads);
    print_row("bootstrap 100 replicates", ts, tp, bitwise_equal(ref.a, par.a));
  }
  return 0;
}
