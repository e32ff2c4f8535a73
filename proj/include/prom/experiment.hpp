#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prom/problems.hpp"

namespace prom {

// --- error metrics -------------------------------------------------------

double spatial_norm_sq(SpatialNorm kind, const double* q, std::size_t n);

// trapezoid rule over equispaced samples of ||.||^2
double time_integral_norm_sq(SpatialNorm kind, const Mat& states, double dt);
double time_integral_diff_norm_sq(SpatialNorm kind, const Mat& a, const Mat& b, double dt);

// integral of ||q - q_rom||^2 over the integral of ||q||^2
double relative_rom_error(const Mat& fom_states, const Mat& rom_states, SpatialNorm kind, double dt);

// sqrt of (sum of squared numerator integrals) / (sum of squared denominator integrals)
double aggregate_error(const Vec& nums, const Vec& dens);

// reconstruction through the basis: shift + V V^T (q - shift)
double projection_error(const PodBasis& basis, const std::vector<Mat>& fom_states, SpatialNorm kind,
                        double dt);

double geometric_mean(const Vec& values);          // values floored at 1e-16
double quantile(Vec values, double p);             // linear interpolation between order statistics

// --- FOM bookkeeping -----------------------------------------------------

Mat solve_fom_states(const BenchmarkProblem& problem, const Vec& xi);

// Disk-backed memo of FOM trajectories, keyed by problem id and parameter value.
class FomCache {
public:
    FomCache(std::filesystem::path dir, std::string problem_id);
    Mat solve(const Vec& xi, const std::function<Mat()>& compute);
    std::size_t solve_count() const { return solve_count_; }  // actual integrations
    std::size_t hit_count() const { return hit_count_; }

private:
    std::filesystem::path path_for(const Vec& xi) const;
    std::filesystem::path dir_;
    std::string id_;
    std::size_t solve_count_ = 0;
    std::size_t hit_count_ = 0;
};

// --- studies -------------------------------------------------------------

struct StudySettings {
    std::size_t n_trials = 1;
    std::size_t budget = 1;
    std::uint64_t seed = 0;
    bool evaluate_errors = true;
    bool run_lhs = true;
    std::size_t n_acq_draws = 50;
    RegGrid reg_grid = RegGrid::default_grid();
    double guard_multiplier = 100.0;
};

StudySettings parse_study_settings(const io::Config& cfg);
RegGrid parse_reg_grid(const io::Config& cfg);

struct ErrorReport {
    Vec per_candidate;   // relative ROM error at every grid parameter
    double e_total = 0.0;
    double e_proj = 0.0;
};

struct EvaluatedCampaign {
    CampaignRecord record;              // bases and reduced means stripped after evaluation
    std::vector<ErrorReport> reports;   // one per iteration; empty when evaluation is off
};

struct StudyTrial {
    std::size_t initial_index = 0;
    std::vector<EvaluatedCampaign> campaigns;  // adaptive first, then space-filling when enabled
};

struct AggregateSeries {  // indexed by n_p - 1; empty when the mode was not run
    Vec geomean_e_total, q5_e_total, q95_e_total;
    Vec geomean_e_proj;
    Vec mean_beta, max_beta;
};

struct StudyResult {
    std::vector<StudyTrial> trials;
    AggregateSeries adaptive, lhs;
    std::vector<Vec> candidates;
    std::vector<std::string> axis_names;
    std::size_t fom_solve_count = 0;
};

StudyResult run_study(const BenchmarkProblem& problem, const StudySettings& settings,
                      const std::filesystem::path& cache_dir);

EvaluatedCampaign run_single_campaign(const BenchmarkProblem& problem, const StudySettings& settings,
                                      CampaignMode mode, std::size_t initial_index,
                                      const std::filesystem::path& cache_dir);

void write_study_csvs(const StudyResult& result, const std::filesystem::path& out_dir);
void write_report_csvs(const std::filesystem::path& study_dir, const std::filesystem::path& out_dir);

}  // namespace prom
