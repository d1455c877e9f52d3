#pragma once

// Batched geometry kernels over structure-of-arrays point sets.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2
// variant. The variant is chosen once at startup from the CPU feature flags
// (override with COURTLAB_ISA=scalar|avx2). Both variants evaluate the same
// expression tree without fused multiply-add, so their outputs are expected
// to agree bit for bit; the equivalence tests hold them to that.

#include <span>
#include <string_view>

namespace courtlab::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Forces a variant for the whole process (tests, benchmarks). Throws if the
/// CPU or build does not provide it.
void set_isa(Isa isa);

/// World-to-pixel pinhole projection constants. `rotation` is row-major.
struct ProjectionParams {
  double rotation[9];
  double translation[3];
  double fx, fy, cx, cy;
};

struct ConstPoints {
  std::span<const double> x, y, z;
  [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
};

struct Points {
  std::span<double> x, y, z;
  [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
};

/// u, v in pixels and camera-frame depth for every point. Points with
/// depth <= 0 still produce values; callers flag them.
void project(const ProjectionParams& params, ConstPoints in, std::span<double> u,
             std::span<double> v, std::span<double> depth);

/// In-place similarity about a center: X' = s X + (1 - s) C.
void scale_about(double s, const double center[3], Points pts);

/// out[i] = |P_i - q|^2.
void squared_distances(const double q[3], ConstPoints pts, std::span<double> out);

namespace scalar {
void project(const ProjectionParams& params, ConstPoints in, std::span<double> u,
             std::span<double> v, std::span<double> depth);
void scale_about(double s, const double center[3], Points pts);
void squared_distances(const double q[3], ConstPoints pts, std::span<double> out);
}  // namespace scalar

namespace avx2 {
void project(const ProjectionParams& params, ConstPoints in, std::span<double> u,
             std::span<double> v, std::span<double> depth);
void scale_about(double s, const double center[3], Points pts);
void squared_distances(const double q[3], ConstPoints pts, std::span<double> out);
}  // namespace avx2

}  // namespace courtlab::kernels
