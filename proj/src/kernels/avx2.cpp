#include <immintrin.h>

#include "repp/kernels.hpp"

namespace repp::kernels::avx2 {

namespace {

inline std::uint64_t window_at(std::span<const std::uint64_t> words, std::size_t t) {
  const std::size_t q = t / 64;
  const unsigned s = t % 64;
  return s == 0 ? words[q] : (words[q] << s) | (words[q + 1] >> (64 - s));
}

}  // namespace

void scan_arc(std::span<const std::uint64_t> words, std::size_t begin, std::size_t end, Arc arc,
              std::vector<std::uint64_t>& out) {
  std::size_t t = begin;
  // Scalar head up to a word boundary.
  for (; t < end && t % 64 != 0; ++t) {
    if (arc.contains(window_at(words, t))) out.push_back(t);
  }
  const __m256i sign = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL));
  const __m256i lo = _mm256_set1_epi64x(static_cast<long long>(arc.lo));
  const __m256i len_s = _mm256_xor_si256(_mm256_set1_epi64x(static_cast<long long>(arc.len)), sign);
  const __m256i base_shift = _mm256_setr_epi64x(0, 1, 2, 3);
  const __m256i c64 = _mm256_set1_epi64x(64);
  for (; t + 64 <= end; t += 64) {
    const std::size_t q = t / 64;
    const __m256i w0 = _mm256_set1_epi64x(static_cast<long long>(words[q]));
    const __m256i w1 = _mm256_set1_epi64x(static_cast<long long>(words[q + 1]));
    __m256i sh = base_shift;
    for (unsigned s = 0; s < 64; s += 4) {
      // srlv by 64 yields 0, which covers s == 0.
      const __m256i win = _mm256_or_si256(_mm256_sllv_epi64(w0, sh),
                                          _mm256_srlv_epi64(w1, _mm256_sub_epi64(c64, sh)));
      const __m256i d = _mm256_xor_si256(_mm256_sub_epi64(win, lo), sign);
      const __m256i in = _mm256_cmpgt_epi64(len_s, d);
      int mask = _mm256_movemask_pd(_mm256_castsi256_pd(in));
      while (mask != 0) {
        const int lane = __builtin_ctz(static_cast<unsigned>(mask));
        out.push_back(t + s + static_cast<unsigned>(lane));
        mask &= mask - 1;
      }
      sh = _mm256_add_epi64(sh, _mm256_set1_epi64x(4));
    }
  }
  for (; t < end; ++t) {
    if (arc.contains(window_at(words, t))) out.push_back(t);
  }
}

void quadratic_scan(double a, std::span<double> x, std::uint64_t steps, std::uint64_t t0, Interval window,
                    std::span<std::vector<std::uint64_t>> hits) {
  const std::size_t full = x.size() / 4 * 4;
  const __m256d va = _mm256_set1_pd(a);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d lo = _mm256_set1_pd(window.lo);
  const __m256d hi = _mm256_set1_pd(window.hi);
  for (std::size_t g = 0; g < full; g += 4) {
    __m256d v = _mm256_loadu_pd(x.data() + g);
    for (std::uint64_t i = 0; i < steps; ++i) {
      const __m256d in = _mm256_and_pd(_mm256_cmp_pd(v, lo, _CMP_GT_OQ), _mm256_cmp_pd(v, hi, _CMP_LT_OQ));
      int mask = _mm256_movemask_pd(in);
      while (mask != 0) {
        const int lane = __builtin_ctz(static_cast<unsigned>(mask));
        hits[g + static_cast<std::size_t>(lane)].push_back(t0 + i);
        mask &= mask - 1;
      }
      v = _mm256_sub_pd(one, _mm256_mul_pd(va, _mm256_mul_pd(v, v)));
    }
    _mm256_storeu_pd(x.data() + g, v);
  }
  if (full < x.size()) {
    scalar::quadratic_scan(a, x.subspan(full), steps, t0, window, hits.subspan(full));
  }
}

}  // namespace repp::kernels::avx2
