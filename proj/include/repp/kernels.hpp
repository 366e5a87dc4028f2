#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "repp/geometry.hpp"

namespace repp::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_available();
/// ISA used by the dispatching entry points below.
Isa active_isa();
/// Pins the ISA (tests); nullopt restores automatic selection.
void force_isa(std::optional<Isa> isa);
const char* isa_name(Isa isa);

/// Appends every t in [begin, end) whose 64-bit tape window starting at bit t
/// lies in `arc`. `words` must hold at least end/64 + 2 entries.
void scan_arc(std::span<const std::uint64_t> words, std::size_t begin, std::size_t end, Arc arc,
              std::vector<std::uint64_t>& out);

/// Runs x <- 1 - a x^2 for `steps` steps on every lane, recording (before each
/// step) the times t0 + i at which lo < x < hi into hits[lane].
void quadratic_scan(double a, std::span<double> x, std::uint64_t steps, std::uint64_t t0, Interval window,
                    std::span<std::vector<std::uint64_t>> hits);

namespace scalar {
void scan_arc(std::span<const std::uint64_t> words, std::size_t begin, std::size_t end, Arc arc,
              std::vector<std::uint64_t>& out);
void quadratic_scan(double a, std::span<double> x, std::uint64_t steps, std::uint64_t t0, Interval window,
                    std::span<std::vector<std::uint64_t>> hits);
}  // namespace scalar

namespace avx2 {
void scan_arc(std::span<const std::uint64_t> words, std::size_t begin, std::size_t end, Arc arc,
              std::vector<std::uint64_t>& out);
void quadratic_scan(double a, std::span<double> x, std::uint64_t steps, std::uint64_t t0, Interval window,
                    std::span<std::vector<std::uint64_t>> hits);
}  // namespace avx2

}  // namespace repp::kernels
