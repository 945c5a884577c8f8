#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dbar {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Error codes shared with the C API (see include/dbarlab.h).
enum class ErrCode : int {
  ok = 0,
  invalid_argument = 1,
  config = 2,
  solver = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrCode code() const { return code_; }

 private:
  ErrCode code_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) { throw Error(ErrCode::invalid_argument, msg); }
[[noreturn]] inline void fail_solver(const std::string& msg) { throw Error(ErrCode::solver, msg); }
[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrCode::config, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { throw Error(ErrCode::io, msg); }

inline double sqr(double x) { return x * x; }

// sgn with sgn(0) = 0, as in the r(lambda) factor.
inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Heaviside step with theta(0) = 1/2 (symmetric convention at the mask diagonal).
inline double heaviside(double x) { return x > 0 ? 1.0 : (x < 0 ? 0.0 : 0.5); }

// Side convention for one-sided circle limits: plus is the limit from
// |lambda| < 1 (radius 1 - h), minus from |lambda| > 1 (radius 1 + h).
enum class Side { plus, minus };

// Static-partition parallel map with deterministic output (each index owns its
// slot; no shared reductions). Thread count from DBARLAB_THREADS, default 1.
int worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dbar
