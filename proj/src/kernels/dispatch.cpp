#include <atomic>

#include "repp/kernels.hpp"

namespace repp::kernels {

namespace {
// -1 automatic, otherwise a forced Isa value.
std::atomic<int> g_forced{-1};
}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() {
  const int f = g_forced.load(std::memory_order_relaxed);
  if (f >= 0) return static_cast<Isa>(f);
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

void force_isa(std::optional<Isa> isa) {
  if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
  g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void scan_arc(std::span<const std::uint64_t> words, std::size_t begin, std::size_t end, Arc arc,
              std::vector<std::uint64_t>& out) {
  if (active_isa() == Isa::Avx2) {
    avx2::scan_arc(words, begin, end, arc, out);
  } else {
    scalar::scan_arc(words, begin, end, arc, out);
  }
}

void quadratic_scan(double a, std::span<double> x, std::uint64_t steps, std::uint64_t t0, Interval window,
                    std::span<std::vector<std::uint64_t>> hits) {
  if (active_isa() == Isa::Avx2) {
    avx2::quadratic_scan(a, x, steps, t0, window, hits);
  } else {
    scalar::quadratic_scan(a, x, steps, t0, window, hits);
  }
}

}  // namespace repp::kernels
