#include "courtlab/kernels/kernels.hpp"

#include <immintrin.h>

namespace courtlab::kernels::avx2 {

namespace {
constexpr std::size_t kLanes = 4;
}

void project(const ProjectionParams& p, ConstPoints in, std::span<double> u, std::span<double> v,
             std::span<double> depth) {
  const double* r = p.rotation;
  const __m256d r0 = _mm256_set1_pd(r[0]), r1 = _mm256_set1_pd(r[1]), r2 = _mm256_set1_pd(r[2]);
  const __m256d r3 = _mm256_set1_pd(r[3]), r4 = _mm256_set1_pd(r[4]), r5 = _mm256_set1_pd(r[5]);
  const __m256d r6 = _mm256_set1_pd(r[6]), r7 = _mm256_set1_pd(r[7]), r8 = _mm256_set1_pd(r[8]);
  const __m256d t0 = _mm256_set1_pd(p.translation[0]);
  const __m256d t1 = _mm256_set1_pd(p.translation[1]);
  const __m256d t2 = _mm256_set1_pd(p.translation[2]);
  const __m256d fx = _mm256_set1_pd(p.fx), fy = _mm256_set1_pd(p.fy);
  const __m256d cx = _mm256_set1_pd(p.cx), cy = _mm256_set1_pd(p.cy);
  const __m256d one = _mm256_set1_pd(1.0);

  const std::size_t n = in.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d x = _mm256_loadu_pd(in.x.data() + i);
    const __m256d y = _mm256_loadu_pd(in.y.data() + i);
    const __m256d z = _mm256_loadu_pd(in.z.data() + i);
    // Same association order as the scalar reference: ((a + b) + c) + t.
    __m256d xc = _mm256_add_pd(_mm256_mul_pd(r0, x), _mm256_mul_pd(r1, y));
    xc = _mm256_add_pd(_mm256_add_pd(xc, _mm256_mul_pd(r2, z)), t0);
    __m256d yc = _mm256_add_pd(_mm256_mul_pd(r3, x), _mm256_mul_pd(r4, y));
    yc = _mm256_add_pd(_mm256_add_pd(yc, _mm256_mul_pd(r5, z)), t1);
    __m256d zc = _mm256_add_pd(_mm256_mul_pd(r6, x), _mm256_mul_pd(r7, y));
    zc = _mm256_add_pd(_mm256_add_pd(zc, _mm256_mul_pd(r8, z)), t2);
    const __m256d inv = _mm256_div_pd(one, zc);
    _mm256_storeu_pd(u.data() + i, _mm256_add_pd(_mm256_mul_pd(fx, _mm256_mul_pd(xc, inv)), cx));
    _mm256_storeu_pd(v.data() + i, _mm256_add_pd(_mm256_mul_pd(fy, _mm256_mul_pd(yc, inv)), cy));
    _mm256_storeu_pd(depth.data() + i, zc);
  }
  if (i < n) {
    scalar::project(p, ConstPoints{in.x.subspan(i), in.y.subspan(i), in.z.subspan(i)},
                    u.subspan(i), v.subspan(i), depth.subspan(i));
  }
}

void scale_about(double s, const double c[3], Points pts) {
  const __m256d sv = _mm256_set1_pd(s);
  const __m256d kx = _mm256_set1_pd((1.0 - s) * c[0]);
  const __m256d ky = _mm256_set1_pd((1.0 - s) * c[1]);
  const __m256d kz = _mm256_set1_pd((1.0 - s) * c[2]);
  const std::size_t n = pts.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    double* px = pts.x.data() + i;
    double* py = pts.y.data() + i;
    double* pz = pts.z.data() + i;
    _mm256_storeu_pd(px, _mm256_add_pd(_mm256_mul_pd(sv, _mm256_loadu_pd(px)), kx));
    _mm256_storeu_pd(py, _mm256_add_pd(_mm256_mul_pd(sv, _mm256_loadu_pd(py)), ky));
    _mm256_storeu_pd(pz, _mm256_add_pd(_mm256_mul_pd(sv, _mm256_loadu_pd(pz)), kz));
  }
  if (i < n) {
    scalar::scale_about(s, c, Points{pts.x.subspan(i), pts.y.subspan(i), pts.z.subspan(i)});
  }
}

void squared_distances(const double q[3], ConstPoints pts, std::span<double> out) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  const std::size_t n = pts.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(pts.x.data() + i), qx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(pts.y.data() + i), qy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pts.z.data() + i), qz);
    __m256d acc = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out.data() + i, acc);
  }
  if (i < n) {
    scalar::squared_distances(
        q, ConstPoints{pts.x.subspan(i), pts.y.subspan(i), pts.z.subspan(i)}, out.subspan(i));
  }
}

}  // namespace courtlab::kernels::avx2
