#include "prom/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "prom/kernels.hpp"
#include "prom/rng.hpp"

namespace prom {

double spatial_norm_sq(SpatialNorm kind, const double* q, std::size_t n) {
    if (kind == SpatialNorm::L2) return kernels::nrm2sq(q, n);
    require(n % 2 == 0, "norm: paired norm needs an even state dimension");
    const std::size_t nf = n / 2;
    double acc = 0.0;
    for (std::size_t i = 0; i < nf; ++i) acc += std::sqrt(q[i] * q[i] + q[nf + i] * q[nf + i]);
    return acc * acc;
}

double time_integral_norm_sq(SpatialNorm kind, const Mat& states, double dt) {
    require(states.rows() >= 2, "integral: need at least two samples");
    double sum = 0.0;
    for (std::size_t j = 0; j < states.rows(); ++j) {
        double f = spatial_norm_sq(kind, states.row(j), states.cols());
        sum += (j == 0 || j + 1 == states.rows()) ? 0.5 * f : f;
    }
    return dt * sum;
}

double time_integral_diff_norm_sq(SpatialNorm kind, const Mat& a, const Mat& b, double dt) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "integral: shape mismatch");
    require(a.rows() >= 2, "integral: need at least two samples");
    Vec diff(a.cols());
    double sum = 0.0;
    for (std::size_t j = 0; j < a.rows(); ++j) {
        const double* pa = a.row(j);
        const double* pb = b.row(j);
        for (std::size_t i = 0; i < a.cols(); ++i) diff[i] = pa[i] - pb[i];
        double f = spatial_norm_sq(kind, diff.data(), diff.size());
        sum += (j == 0 || j + 1 == a.rows()) ? 0.5 * f : f;
    }
    return dt * sum;
}

double relative_rom_error(const Mat& fom_states, const Mat& rom_states, SpatialNorm kind,
                          double dt) {
    double den = time_integral_norm_sq(kind, fom_states, dt);
    require(den > 0.0, "error: reference trajectory has zero energy");
    return time_integral_diff_norm_sq(kind, fom_states, rom_states, dt) / den;
}

double aggregate_error(const Vec& nums, const Vec& dens) {
    require(nums.size() == dens.size() && !nums.empty(), "error: mismatched aggregates");
    double num2 = 0.0, den2 = 0.0;
    for (std::size_t i = 0; i < nums.size(); ++i) {
        num2 += nums[i] * nums[i];
        den2 += dens[i] * dens[i];
    }
    require(den2 > 0.0, "error: reference trajectories have zero energy");
    return std::sqrt(num2 / den2);
}

double projection_error(const PodBasis& basis, const std::vector<Mat>& fom_states,
                        SpatialNorm kind, double dt) {
    require(!fom_states.empty(), "error: no trajectories to project");
    Vec nums(fom_states.size()), dens(fom_states.size());
    for (std::size_t i = 0; i < fom_states.size(); ++i) {
        Mat recon = basis.lift_rows(basis.compress_rows(fom_states[i]));
        nums[i] = time_integral_diff_norm_sq(kind, fom_states[i], recon, dt);
        dens[i] = time_integral_norm_sq(kind, fom_states[i], dt);
    }
    return aggregate_error(nums, dens);
}

double geometric_mean(const Vec& values) {
    require(!values.empty(), "geomean: empty sample");
    double acc = 0.0;
    for (double v : values) acc += std::log(std::max(v, 1e-16));
    return std::exp(acc / static_cast<double>(values.size()));
}

double quantile(Vec values, double p) {
    require(!values.empty(), "quantile: empty sample");
    require(p >= 0.0 && p <= 1.0, "quantile: p outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Mat solve_fom_states(const BenchmarkProblem& problem, const Vec& xi) {
    Trajectory traj = integrate(*problem.fom, xi, problem.initial_state, problem.fom_grid,
                                InstabilityGuard{problem.fom_guard});
    if (!traj.stable) {
        std::ostringstream os;
        os << "fom: unstable integration at parameter (";
        for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? ", " : "") << xi[i];
        os << ")";
        throw std::runtime_error(os.str());
    }
    Mat states(traj.states.size(), problem.initial_state.size());
    for (std::size_t j = 0; j < traj.states.size(); ++j) states.set_row(j, traj.states[j]);
    return states;
}

FomCache::FomCache(std::filesystem::path dir, std::string problem_id)
    : dir_(std::move(dir)), id_(std::move(problem_id)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path FomCache::path_for(const Vec& xi) const {
    std::uint64_t h = 0x243f6a8885a308d3ull;
    for (double v : xi) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h = mix_seed(h, bits);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return dir_ / (id_ + "-" + buf + ".promdat");
}

Mat FomCache::solve(const Vec& xi, const std::function<Mat()>& compute) {
    const std::filesystem::path path = path_for(xi);
    if (std::filesystem::exists(path)) {
        ++hit_count_;
        return io::read_promdat(path);
    }
    Mat states = compute();
    ++solve_count_;
    std::ostringstream meta;
    meta << "problem=" << id_ << "\nxi=";
    for (std::size_t i = 0; i < xi.size(); ++i) meta << (i ? " " : "") << io::fmt_g17(xi[i]);
    meta << "\nrows=" << states.rows() << "\ncols=" << states.cols() << "\n";
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    if (std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now)))
        meta << "created=" << stamp << "\n";
    io::write_promdat_atomic(path, states, meta.str());
    return states;
}

RegGrid parse_reg_grid(const io::Config& cfg) {
    RegGrid g;
    const double emin = cfg.get_double_or("regularization", "exp_min", -10.0);
    const double emax = cfg.get_double_or("regularization", "exp_max", 4.0);
    const double estep = cfg.get_double_or("regularization", "exp_step", 2.0);
    require(estep > 0.0 && emax >= emin, "config: bad regularization exponent range");
    g.lambda1.clear();
    for (double e = emin; e <= emax + 1e-9; e += estep) g.lambda1.push_back(std::pow(10.0, e));
    g.lambda2 = g.lambda1;
    g.n_draws = cfg.get_size_or("regularization", "n_draws", 20);
    return g;
}

StudySettings parse_study_settings(const io::Config& cfg) {
    StudySettings s;
    s.n_trials = cfg.get_size_or("study", "trials", 1);
    s.budget = cfg.get_size("study", "budget");
    s.seed = static_cast<std::uint64_t>(cfg.get_size_or("study", "seed", 0));
    s.evaluate_errors = cfg.get_bool_or("study", "evaluate_errors", true);
    s.run_lhs = cfg.get_bool_or("study", "run_lhs", true);
    s.n_acq_draws = cfg.get_size_or("acquisition", "n_draws", 50);
    s.reg_grid = parse_reg_grid(cfg);
    s.guard_multiplier = cfg.get_double_or("study", "guard_multiplier", 100.0);
    return s;
}

namespace {

CampaignConfig make_campaign_config(const BenchmarkProblem& problem, const StudySettings& settings,
                                    const std::function<Mat(const Vec&)>& solve_fom) {
    CampaignConfig cfg;
    cfg.solve_fom = solve_fom;
    cfg.initial_state = problem.initial_state;
    cfg.make_structure = problem.make_structure;
    cfg.shift_mode = problem.shift_mode;
    cfg.rule = problem.rule;
    cfg.axes = problem.axes;
    cfg.rom_grid = problem.rom_grid;
    cfg.n_acq_draws = settings.n_acq_draws;
    cfg.reg_grid = settings.reg_grid;
    cfg.guard_multiplier = settings.guard_multiplier;
    return cfg;
}

// Scores every iteration against the full candidate grid, then drops the
// basis and the per-candidate means so long studies stay within memory.
EvaluatedCampaign evaluate_campaign(CampaignRecord rec, const BenchmarkProblem& problem,
                                    const std::vector<Mat>& fom_states, const Vec& dens,
                                    double dt) {
    EvaluatedCampaign out;
    if (!fom_states.empty()) {
        const std::size_t g = fom_states.size();
        for (IterationRecord& it : rec.iterations) {
            ErrorReport rep;
            rep.per_candidate.resize(g);
            Vec nums(g), pnums(g);
            for (std::size_t i = 0; i < g; ++i) {
                if (it.mean_reduced[i].empty()) {
                    nums[i] = dens[i];  // no stable draw anywhere: full relative error
                } else {
                    Mat lifted = it.basis->lift_rows(it.mean_reduced[i]);
                    nums[i] = time_integral_diff_norm_sq(problem.norm, fom_states[i], lifted, dt);
                }
                rep.per_candidate[i] = nums[i] / dens[i];
                Mat recon = it.basis->lift_rows(it.basis->compress_rows(fom_states[i]));
                pnums[i] = time_integral_diff_norm_sq(problem.norm, fom_states[i], recon, dt);
            }
            rep.e_total = aggregate_error(nums, dens);
            rep.e_proj = aggregate_error(pnums, dens);
            out.reports.push_back(std::move(rep));
        }
    }
    for (IterationRecord& it : rec.iterations) {
        it.basis.reset();
        it.mean_reduced.clear();
        it.mean_reduced.shrink_to_fit();
    }
    out.record = std::move(rec);
    return out;
}

const char* mode_name(CampaignMode mode) {
    return mode == CampaignMode::Adaptive ? "adaptive" : "lhs";
}

AggregateSeries aggregate_mode(const std::vector<const EvaluatedCampaign*>& runs) {
    AggregateSeries s;
    if (runs.empty()) return s;
    std::size_t n_iter = 0;
    for (const EvaluatedCampaign* run : runs)
        n_iter = std::max(n_iter, run->record.iterations.size());
    for (std::size_t k = 0; k < n_iter; ++k) {
        Vec et, ep, betas;
        for (const EvaluatedCampaign* run : runs) {
            if (k < run->record.iterations.size())
                betas.push_back(run->record.iterations[k].beta);
            if (k < run->reports.size()) {
                et.push_back(run->reports[k].e_total);
                ep.push_back(run->reports[k].e_proj);
            }
        }
        double bsum = 0.0, bmax = 0.0;
        for (double b : betas) {
            bsum += b;
            bmax = std::max(bmax, b);
        }
        s.mean_beta.push_back(betas.empty() ? 0.0 : bsum / static_cast<double>(betas.size()));
        s.max_beta.push_back(bmax);
        if (!et.empty()) {
            s.geomean_e_total.push_back(geometric_mean(et));
            s.q5_e_total.push_back(quantile(et, 0.05));
            s.q95_e_total.push_back(quantile(et, 0.95));
            s.geomean_e_proj.push_back(geometric_mean(ep));
        }
    }
    return s;
}

}  // namespace

StudyResult run_study(const BenchmarkProblem& problem, const StudySettings& settings,
                      const std::filesystem::path& cache_dir) {
    require(settings.n_trials >= 1, "study: need at least one trial");
    CandidateSet grid = CandidateSet::tensor_grid(problem.axes);
    const std::size_t g = grid.size();
    require(settings.budget >= 1 && settings.budget <= g, "study: budget outside the grid size");

    FomCache cache(cache_dir, problem.id);
    auto cached_solve = [&](const Vec& xi) {
        return cache.solve(xi, [&] { return solve_fom_states(problem, xi); });
    };

    StudyResult result;
    result.candidates = grid.candidates();
    for (const AxisSpec& a : problem.axes) result.axis_names.push_back(a.name);

    std::vector<Mat> fom_states;
    Vec dens;
    const double dt = problem.rom_grid.sample_dt();
    if (settings.evaluate_errors) {
        fom_states.reserve(g);
        for (std::size_t i = 0; i < g; ++i) {
            fom_states.push_back(cached_solve(grid.candidate(i)));
            dens.push_back(time_integral_norm_sq(problem.norm, fom_states.back(), dt));
            require(dens.back() > 0.0, "study: reference trajectory has zero energy");
        }
    }

    CampaignConfig cfg = make_campaign_config(problem, settings, cached_solve);
    for (std::size_t trial = 0; trial < settings.n_trials; ++trial) {
        StudyTrial tr;
        tr.initial_index = SplitMix64(mix_seed(settings.seed, 7, trial)).next_index(g);
        CampaignRecord adaptive = run_campaign(cfg, CampaignMode::Adaptive, tr.initial_index,
                                               settings.budget, mix_seed(settings.seed, 8, trial));
        tr.campaigns.push_back(
            evaluate_campaign(std::move(adaptive), problem, fom_states, dens, dt));
        if (settings.run_lhs) {
            CampaignRecord lhs = run_campaign(cfg, CampaignMode::Lhs, tr.initial_index,
                                              settings.budget, mix_seed(settings.seed, 9, trial));
            tr.campaigns.push_back(evaluate_campaign(std::move(lhs), problem, fom_states, dens, dt));
        }
        result.trials.push_back(std::move(tr));
    }

    std::vector<const EvaluatedCampaign*> adaptive_runs, lhs_runs;
    for (const StudyTrial& tr : result.trials)
        for (const EvaluatedCampaign& c : tr.campaigns)
            (c.record.mode == CampaignMode::Adaptive ? adaptive_runs : lhs_runs).push_back(&c);
    result.adaptive = aggregate_mode(adaptive_runs);
    result.lhs = aggregate_mode(lhs_runs);
    result.fom_solve_count = cache.solve_count();
    return result;
}

EvaluatedCampaign run_single_campaign(const BenchmarkProblem& problem,
                                      const StudySettings& settings, CampaignMode mode,
                                      std::size_t initial_index,
                                      const std::filesystem::path& cache_dir) {
    CandidateSet grid = CandidateSet::tensor_grid(problem.axes);
    FomCache cache(cache_dir, problem.id);
    auto cached_solve = [&](const Vec& xi) {
        return cache.solve(xi, [&] { return solve_fom_states(problem, xi); });
    };
    std::vector<Mat> fom_states;
    Vec dens;
    const double dt = problem.rom_grid.sample_dt();
    if (settings.evaluate_errors) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            fom_states.push_back(cached_solve(grid.candidate(i)));
            dens.push_back(time_integral_norm_sq(problem.norm, fom_states.back(), dt));
            require(dens.back() > 0.0, "study: reference trajectory has zero energy");
        }
    }
    CampaignConfig cfg = make_campaign_config(problem, settings, cached_solve);
    CampaignRecord rec = run_campaign(cfg, mode, initial_index, settings.budget, settings.seed);
    return evaluate_campaign(std::move(rec), problem, fom_states, dens, dt);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "csv: cannot open " + path.string());
    return os;
}

}  // namespace

void write_study_csvs(const StudyResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream os = open_csv(out_dir / "candidates.csv");
        os << "index";
        for (const std::string& name : result.axis_names) os << "," << name;
        os << "\n";
        for (std::size_t i = 0; i < result.candidates.size(); ++i) {
            os << i;
            for (double v : result.candidates[i]) os << "," << io::fmt_g17(v);
            os << "\n";
        }
    }
    {
        std::ofstream os = open_csv(out_dir / "samples.csv");
        os << "trial,n_p,mode";
        for (const std::string& name : result.axis_names) os << "," << name;
        os << "\n";
        for (std::size_t t = 0; t < result.trials.size(); ++t)
            for (const EvaluatedCampaign& c : result.trials[t].campaigns)
                for (std::size_t k = 0; k < c.record.sample_indices.size(); ++k) {
                    os << t << "," << (k + 1) << "," << mode_name(c.record.mode);
                    for (double v : result.candidates[c.record.sample_indices[k]])
                        os << "," << io::fmt_g17(v);
                    os << "\n";
                }
    }
    {
        std::ofstream os = open_csv(out_dir / "instability.csv");
        os << "trial,n_p,mode,beta\n";
        for (std::size_t t = 0; t < result.trials.size(); ++t)
            for (const EvaluatedCampaign& c : result.trials[t].campaigns)
                for (const IterationRecord& it : c.record.iterations)
                    os << t << "," << it.n_p << "," << mode_name(c.record.mode) << ","
                       << io::fmt_g17(it.beta) << "\n";
    }
    {
        std::ofstream os = open_csv(out_dir / "errors.csv");
        os << "trial,n_p,mode,e_total,e_proj\n";
        for (std::size_t t = 0; t < result.trials.size(); ++t)
            for (const EvaluatedCampaign& c : result.trials[t].campaigns)
                for (std::size_t k = 0; k < c.reports.size(); ++k)
                    os << t << "," << c.record.iterations[k].n_p << ","
                       << mode_name(c.record.mode) << "," << io::fmt_g17(c.reports[k].e_total)
                       << "," << io::fmt_g17(c.reports[k].e_proj) << "\n";
    }
    {
        std::ofstream os = open_csv(out_dir / "acquisition.csv");
        os << "trial,n_p,candidate_index,alpha,omega\n";
        for (std::size_t t = 0; t < result.trials.size(); ++t)
            for (const EvaluatedCampaign& c : result.trials[t].campaigns) {
                if (c.record.mode != CampaignMode::Adaptive) continue;
                for (const IterationRecord& it : c.record.iterations)
                    for (std::size_t i = 0; i < it.scores.size(); ++i) {
                        os << t << "," << it.n_p << "," << i << ","
                           << io::fmt_g17(it.scores[i].alpha) << ",";
                        if (it.scores[i].omega) os << io::fmt_g17(*it.scores[i].omega);
                        os << "\n";
                    }
            }
    }
    {
        std::ofstream os = open_csv(out_dir / "regularization.csv");
        os << "trial,n_p,mode,r,lambda1,lambda2,training_error,all_stable\n";
        for (std::size_t t = 0; t < result.trials.size(); ++t)
            for (const EvaluatedCampaign& c : result.trials[t].campaigns)
                for (const IterationRecord& it : c.record.iterations)
                    os << t << "," << it.n_p << "," << mode_name(c.record.mode) << "," << it.r
                       << "," << io::fmt_g17(it.lambda1) << "," << io::fmt_g17(it.lambda2) << ","
                       << io::fmt_g17(it.training_error) << "," << (it.reg_all_stable ? 1 : 0)
                       << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

struct GroupKey {
    std::string mode;
    std::size_t n_p;
    bool operator<(const GroupKey& o) const {
        return mode != o.mode ? mode < o.mode : n_p < o.n_p;
    }
};

}  // namespace

void write_report_csvs(const std::filesystem::path& study_dir,
                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ifstream is(study_dir / "errors.csv");
        require(is.good(), "report: cannot open " + (study_dir / "errors.csv").string());
        std::map<GroupKey, std::pair<Vec, Vec>> groups;  // e_total, e_proj samples
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto f = split_csv_line(line);
            require(f.size() == 5, "report: malformed errors.csv row");
            GroupKey key{f[2], static_cast<std::size_t>(std::stoull(f[1]))};
            groups[key].first.push_back(std::stod(f[3]));
            groups[key].second.push_back(std::stod(f[4]));
        }
        std::ofstream os = open_csv(out_dir / "figure_errors.csv");
        os << "mode,n_p,geomean_e_total,q5_e_total,q95_e_total,geomean_e_proj\n";
        for (const auto& [key, vals] : groups)
            os << key.mode << "," << key.n_p << "," << io::fmt_g17(geometric_mean(vals.first))
               << "," << io::fmt_g17(quantile(vals.first, 0.05)) << ","
               << io::fmt_g17(quantile(vals.first, 0.95)) << ","
               << io::fmt_g17(geometric_mean(vals.second)) << "\n";
    }
    {
        std::ifstream is(study_dir / "instability.csv");
        require(is.good(), "report: cannot open " + (study_dir / "instability.csv").string());
        std::map<GroupKey, Vec> groups;
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto f = split_csv_line(line);
            require(f.size() == 4, "report: malformed instability.csv row");
            groups[GroupKey{f[2], static_cast<std::size_t>(std::stoull(f[1]))}].push_back(
                std::stod(f[3]));
        }
        std::ofstream os = open_csv(out_dir / "figure_instability.csv");
        os << "mode,n_p,mean_beta,max_beta\n";
        for (const auto& [key, betas] : groups) {
            double sum = 0.0, mx = 0.0;
            for (double b : betas) {
                sum += b;
                mx = std::max(mx, b);
            }
            os << key.mode << "," << key.n_p << ","
               << io::fmt_g17(sum / static_cast<double>(betas.size())) << "," << io::fmt_g17(mx)
               << "\n";
        }
    }
}

}  // namespace prom
