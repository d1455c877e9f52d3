#include "courtlab/kernels/kernels.hpp"

#include "courtlab/common.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace courtlab::kernels {

#ifndef COURTLAB_HAVE_AVX2
// Without the AVX2 translation unit the avx2 entry points forward to the
// reference so the symbols always resolve; isa_available() reports false.
namespace avx2 {
void project(const ProjectionParams& p, ConstPoints in, std::span<double> u, std::span<double> v,
             std::span<double> depth) {
  scalar::project(p, in, u, v, depth);
}
void scale_about(double s, const double c[3], Points pts) { scalar::scale_about(s, c, pts); }
void squared_distances(const double q[3], ConstPoints pts, std::span<double> out) {
  scalar::squared_distances(q, pts, out);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(COURTLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("COURTLAB_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::invalid_argument,
                "kernel variant " + std::string(to_string(isa)) + " is not available");
  }
  current().store(isa, std::memory_order_relaxed);
}

void project(const ProjectionParams& params, ConstPoints in, std::span<double> u,
             std::span<double> v, std::span<double> depth) {
  if (active_isa() == Isa::avx2) {
    avx2::project(params, in, u, v, depth);
  } else {
    scalar::project(params, in, u, v, depth);
  }
}

void scale_about(double s, const double center[3], Points pts) {
  if (active_isa() == Isa::avx2) {
    avx2::scale_about(s, center, pts);
  } else {
    scalar::scale_about(s, center, pts);
  }
}

void squared_distances(const double q[3], ConstPoints pts, std::span<double> out) {
  if (active_isa() == Isa::avx2) {
    avx2::squared_distances(q, pts, out);
  } else {
    scalar::squared_distances(q, pts, out);
  }
}

}  // namespace courtlab::kernels
