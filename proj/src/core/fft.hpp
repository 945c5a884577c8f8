#pragma once

#include <vector>

#include "core/common.hpp"

namespace dbar {

// Thin wrapper over FFTW complex 2-D transforms with a process-wide plan
// cache. Plans use FFTW_ESTIMATE so the algorithm choice (and hence the exact
// floating-point result) is reproducible run to run. Plan creation is
// mutex-guarded; execution on distinct buffers is thread-safe.
namespace fft {

// In-place forward/inverse transform of a row-major ny-by-nx complex array.
// The inverse is unnormalized (same convention as FFTW); callers scale.
void forward2d(cplx* data, int ny, int nx);
void inverse2d(cplx* data, int ny, int nx);

void forward2d(std::vector<cplx>& data, int ny, int nx);
void inverse2d(std::vector<cplx>& data, int ny, int nx);

// 1-D helpers for circle-node spectra.
void forward1d(cplx* data, int n);
void inverse1d(cplx* data, int n);

}  // namespace fft
}  // namespace dbar
