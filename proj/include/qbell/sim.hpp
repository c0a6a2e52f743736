#pragma once

#include <cstdint>
#include <vector>

#include "qbell/bell.hpp"

namespace qbell {

struct ExperimentPlan {
    int d = 0;
    ComplexMatrix state;  // d^2 x d^2 density matrix
    double total_rate = 0.0;            // expected coincidences/s per setting pair
    double integration_time = 20.0;     // seconds
    double crosstalk_epsilon = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CountRecord {
    int a = 0, b = 0, v = 0, w = 0;
    std::uint64_t count = 0;
};

// Poisson draw per (a,b,v,w) cell with lambda = rate * time * p; per-cell
// counter-based substreams keep the output independent of evaluation order.
std::vector<CountRecord> simulate_counts(const ExperimentPlan& plan);

// Nearest-neighbour outcome leakage, total weight epsilon split between the
// two arms; per-setting normalisation is preserved and a uniform table is a
// fixed point.
ProbabilityTable crosstalk_mix(const ProbabilityTable& table, double epsilon);

// Counts -> per-setting probabilities -> S_d, with first-order Poisson error
// propagation (Var(count) = count).
BellValue estimate_s_with_sigma(const std::vector<CountRecord>& records, int d);

// Resampling cross-check of the propagated sigma.
double bootstrap_sigma(const std::vector<CountRecord>& records, int d, int replicas,
                       std::uint64_t seed);

struct SweepRow {
    int d = 0;
    double s = 0.0;
    double sigma = 0.0;
    bool filtered = false;
    double gamma = 0.0;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    double total_rate = 50.0;
    double integration_time = 20.0;
    double crosstalk_epsilon = 0.0;
    std::uint64_t seed = 0;
};

// Lorentzian source (optionally Procrustean-filtered) measured at every d in
// [d_min, d_max]. Filtering scales the expected counts by the success
// probability.
std::vector<SweepRow> run_sd_sweep(double gamma, int d_min, int d_max, bool filtered,
                                   const SweepOptions& options);

} // namespace qbell
