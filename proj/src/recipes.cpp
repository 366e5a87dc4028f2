#include "repp/runner.hpp"

namespace repp {

namespace {

constexpr Recipe kRecipes[] = {
    {"doubling-zeta0", "doubling map, fixed point 0: extremal index, cluster sizes and counts",
     R"({
  "experiment": "repp",
  "name": "doubling-zeta0",
  "family": "linear_mod_m",
  "m": 2,
  "itinerary": [0],
  "tau": 5,
  "n": 1000000,
  "windows": [[[0, 1]], [[0, 2]], [[0, 5]]],
  "trials": 500,
  "seed": 1
}
)"},
    {"doubling-zeta13", "doubling map, period-2 orbit through 1/3",
     R"({
  "experiment": "repp",
  "name": "doubling-zeta13",
  "family": "linear_mod_m",
  "m": 2,
  "itinerary": [0, 1],
  "tau": 5,
  "n": 1000000,
  "windows": [[[0, 5]]],
  "trials": 500,
  "seed": 2
}
)"},
    {"bernoulli-03", "doubling map under the (0.3, 0.7) Bernoulli measure, fixed point 0",
     R"({
  "experiment": "repp",
  "name": "bernoulli-03",
  "family": "bernoulli_doubling",
  "alpha": 0.3,
  "itinerary": [0],
  "tau": 5,
  "n": 1000000,
  "windows": [[[0, 5]]],
  "trials": 500,
  "seed": 3
}
)"},
    {"quadratic-a2", "Chebyshev quadratic map, fixed point 1/2, arcsine thresholds",
     R"({
  "experiment": "repp",
  "name": "quadratic-a2",
  "family": "quadratic",
  "a": 2,
  "itinerary": [1],
  "tau": 5,
  "n": 1000000,
  "windows": [[[0, 5]]],
  "trials": 500,
  "seed": 4
}
)"},
    {"pa-counts", "doubling map, fixed point 0: count laws over windows of mass 1, 2 and 5",
     R"({
  "experiment": "repp",
  "name": "pa-counts",
  "family": "linear_mod_m",
  "m": 2,
  "itinerary": [0],
  "tau": 5,
  "n": 100000,
  "windows": [[[0, 1]], [[0, 2]], [[0, 5]]],
  "trials": 2000,
  "seed": 5
}
)"},
    {"evl-doubling", "probability of no exceedance before n, doubling map at 0",
     R"({
  "experiment": "evl",
  "name": "evl-doubling",
  "family": "linear_mod_m",
  "m": 2,
  "itinerary": [0],
  "tau": 1,
  "n": 100000,
  "trials": 10000,
  "seed": 6
}
)"},
    {"golden-control", "doubling map, non-periodic centre at the golden-ratio fraction",
     R"({
  "experiment": "repp",
  "name": "golden-control",
  "family": "linear_mod_m",
  "m": 2,
  "zeta": 0.6180339887498949,
  "periodic": false,
  "tau": 5,
  "n": 1000000,
  "windows": [[[0, 5]]],
  "trials": 500,
  "seed": 7
}
)"},
    {"hts-golden", "hitting and return time laws, non-periodic centre",
     R"({
  "experiment": "hts_rts",
  "name": "hts-golden",
  "family": "linear_mod_m",
  "m": 2,
  "zeta": 0.6180339887498949,
  "periodic": false,
  "tau": 1,
  "n": 1000,
  "hts_samples": 10000,
  "seed": 8
}
)"},
    {"hts-zeta0", "hitting and return time laws at the fixed point 0, with the return-time mean",
     R"({
  "experiment": "hts_rts",
  "name": "hts-zeta0",
  "family": "linear_mod_m",
  "m": 2,
  "itinerary": [0],
  "tau": 1,
  "n": 1000,
  "hts_samples": 10000,
  "kac_samples": 100000,
  "seed": 9
}
)"},
    {"kac-mp", "mean return time to an interval for the intermittent map",
     R"({
  "experiment": "hts_rts",
  "name": "kac-mp",
  "family": "manneville_pomeau",
  "alpha": 0.3,
  "region": [[0.7, 0.72]],
  "hts_samples": 0,
  "kac_samples": 100000,
  "seed": 10
}
)"},
    {"induced-mp", "intermittent map: counts of the original and the first-return system",
     R"({
  "experiment": "induced_compare",
  "name": "induced-mp",
  "family": "manneville_pomeau",
  "alpha": 0.3,
  "itinerary": [1, 0],
  "tau": 2,
  "n": 10000,
  "windows": [[[0, 2]]],
  "trials": 10000,
  "threshold": "empirical",
  "calibration": 10000000,
  "base_set": [[0.5, 1]],
  "burn_in_returns": 1000,
  "seed": 11
}
)"},
    {"conditions-doubling", "mixing diagnostics for the doubling map at 0",
     R"({
  "experiment": "conditions",
  "name": "conditions-doubling",
  "family": "linear_mod_m",
  "m": 2,
  "itinerary": [0],
  "tau": 1,
  "n": [10000, 100000, 1000000],
  "samples": 100000,
  "gaps": [1, 2, 4, 8, 16, 32, 64],
  "gamma_n": 10000,
  "gamma_samples": 100000,
  "seed": 12
}
)"},
    {"bc-a2", "finite-time growth and recurrence checks at a = 2",
     R"({
  "experiment": "bc_check",
  "name": "bc-a2",
  "family": "quadratic",
  "a": 2,
  "itinerary": [1],
  "c": 1.2,
  "bc_alpha": 0.01,
  "horizon": 50
}
)"},
};

}  // namespace

std::span<const Recipe> recipes() { return kRecipes; }

}  // namespace repp
