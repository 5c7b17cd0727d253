#pragma once

#include <string>

#include "lrsm/metrics.hpp"
#include "lrsm/simulate.hpp"

namespace lrsm {

struct RepRecord {
    index_t rep = 0;
    index_t m_hat = 0;
    double zeta_u = 0.0;
    double zeta_o = 0.0;
    double zeta_d = 0.0;
    double seconds = 0.0;
    std::vector<index_t> taus;
};

struct ExperimentSummary {
    std::string model;
    index_t n = 0;
    index_t reps = 0;
    double tpr = 0.0;
    double zeta_u = 0.0;  // means over replicates
    double zeta_o = 0.0;
    double zeta_d = 0.0;
    double mean_seconds = 0.0;
    std::vector<RepRecord> records;
};

// Monte-Carlo detection study on a builtin model: simulate -> detect ->
// segmentation metrics.  Replicate r draws its data from substream(seed, r),
// so results do not depend on scheduling.
ExperimentSummary run_experiment(const std::string& model, index_t n, const ScanConfig& cfg,
                                 index_t reps, std::uint64_t seed);

struct CiExperimentOptions {
    double alpha = 0.1;
    index_t B = 1000;
    index_t n_p = 0;  // 0 -> floor(n/2)
    index_t n_b = 0;  // 0 -> adaptive per replicate
    index_t reps = 200;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct CiCpSummary {
    index_t j = 0;
    double coverage = 0.0;
    double mean_lower = 0.0;
    double mean_upper = 0.0;
    double median_tau3 = 0.0;
    double mean_nb = 0.0;  // BBA only: average bandwidth used
};

struct CiExperimentSummary {
    std::string model;
    index_t n = 0;
    CiMethod method = CiMethod::Approx;
    double alpha = 0.1;
    index_t attempts = 0;  // replicates simulated
    index_t used = 0;      // replicates with the correct change-point count
    std::vector<CiCpSummary> cps;
};

// Coverage study: replicates keep arriving until `reps` of them detect the
// true change-point count (or 3x as many have been tried); only those enter
// the per-change-point coverage numbers, matching how coverage tables are
// usually reported.
CiExperimentSummary run_ci_experiment(const std::string& model, index_t n, CiMethod method,
                                      const ScanConfig& cfg, const CiExperimentOptions& opt);

struct ScalingPoint {
    index_t n = 0;
    index_t h = 0;
    double seconds = 0.0;
};

struct ScalingResult {
    std::vector<ScalingPoint> points;
    double slope = 0.0;  // least-squares slope of log(seconds) vs log(n*h)
};

// Detection runtime as a function of n at fixed window radius; times the
// full pipeline on one thread.
ScalingResult scaling_probe(const std::vector<index_t>& ns, index_t h, index_t reps,
                            const std::string& model = "A1", std::uint64_t seed = 1);

}  // namespace lrsm
