#include "core/fft.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <map>
#include <mutex>
#include <tuple>

namespace dbar {

int worker_count() {
  static int n = [] {
    if (const char* env = std::getenv("DBARLAB_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 1;
  }();
  return n;
}

namespace {
thread_local bool g_in_parallel = false;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = worker_count();
  if (workers <= 1 || n <= 1 || g_in_parallel) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t nthreads = std::min<std::size_t>(workers, n);
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      g_in_parallel = true;
      for (std::size_t i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace fft {
namespace {

std::mutex g_plan_mutex;

// FFTW plans are reusable across arrays via fftw_execute_dft as long as the
// alignment matches; we plan with FFTW_ESTIMATE | FFTW_UNALIGNED so any buffer
// is acceptable.
fftw_plan plan2d(int ny, int nx, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_tuple(ny, nx, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> scratch(static_cast<std::size_t>(ny) * nx);
  fftw_plan p = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(scratch.data()),
                                 reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

fftw_plan plan1d(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> scratch(n);
  fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                 reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

}  // namespace

void forward2d(cplx* data, int ny, int nx) {
  fftw_plan p = plan2d(ny, nx, FFTW_FORWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
}

void inverse2d(cplx* data, int ny, int nx) {
  fftw_plan p = plan2d(ny, nx, FFTW_BACKWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
}

void forward2d(std::vector<cplx>& data, int ny, int nx) { forward2d(data.data(), ny, nx); }
void inverse2d(std::vector<cplx>& data, int ny, int nx) { inverse2d(data.data(), ny, nx); }

void forward1d(cplx* data, int n) {
  fftw_plan p = plan1d(n, FFTW_FORWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
}

void inverse1d(cplx* data, int n) {
  fftw_plan p = plan1d(n, FFTW_BACKWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
}

}  // namespace fft
}  // namespace dbar
