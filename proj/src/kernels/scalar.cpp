#include "repp/kernels.hpp"

namespace repp::kernels::scalar {

void scan_arc(std::span<const std::uint64_t> words, std::size_t begin, std::size_t end, Arc arc,
              std::vector<std::uint64_t>& out) {
  for (std::size_t t = begin; t < end; ++t) {
    const std::size_t q = t / 64;
    const unsigned s = t % 64;
    const std::uint64_t w = s == 0 ? words[q] : (words[q] << s) | (words[q + 1] >> (64 - s));
    if (arc.contains(w)) out.push_back(t);
  }
}

void quadratic_scan(double a, std::span<double> x, std::uint64_t steps, std::uint64_t t0, Interval window,
                    std::span<std::vector<std::uint64_t>> hits) {
  for (std::size_t lane = 0; lane < x.size(); ++lane) {
    double v = x[lane];
    for (std::uint64_t i = 0; i < steps; ++i) {
      if (v > window.lo && v < window.hi) hits[lane].push_back(t0 + i);
      v = 1.0 - a * (v * v);
    }
    x[lane] = v;
  }
}

}  // namespace repp::kernels::scalar
