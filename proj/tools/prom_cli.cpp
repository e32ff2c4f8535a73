#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prom/experiment.hpp"

namespace {

prom::BenchmarkProblem load_problem(const std::string& config_path, const std::string& kind) {
    if (config_path.empty()) {
        if (kind == "burgers") return prom::make_burgers_problem();
        return prom::make_heat_problem();
    }
    prom::io::Config cfg = prom::io::Config::parse_file(config_path);
    prom::BenchmarkProblem p = prom::build_problem(cfg);
    if (!kind.empty()) {
        const std::string cfg_kind = p.kind == prom::ProblemKind::Heat ? "heat" : "burgers";
        prom::require(cfg_kind == kind, "cli: --problem disagrees with the config file");
    }
    return p;
}

int cmd_fom_solve(const std::string& kind, const std::vector<double>& param,
                  const std::string& out, const std::string& config_path) {
    prom::BenchmarkProblem p = load_problem(config_path, kind);
    prom::require(param.size() == p.axes.size(),
                  "cli: expected " + std::to_string(p.axes.size()) + " parameter values");
    prom::Mat states = prom::solve_fom_states(p, param);
    std::string meta = "problem=" + p.id + "\nxi=";
    for (std::size_t i = 0; i < param.size(); ++i)
        meta += (i ? " " : "") + prom::io::fmt_g17(param[i]);
    meta += "\nt0=" + prom::io::fmt_g17(p.fom_grid.t0) + "\ntf=" + prom::io::fmt_g17(p.fom_grid.tf);
    meta += "\nn_t=" + std::to_string(p.fom_grid.n_t) + "\n";
    prom::io::write_promdat_atomic(out, states, meta);
    std::printf("wrote %zu x %zu states to %s\n", states.rows(), states.cols(), out.c_str());
    return 0;
}

int cmd_campaign_run(const std::string& config_path, const std::string& mode_str,
                     std::uint64_t seed, const std::string& out, std::size_t initial_index,
                     bool initial_given) {
    prom::io::Config cfg = prom::io::Config::parse_file(config_path);
    prom::BenchmarkProblem problem = prom::build_problem(cfg);
    prom::StudySettings settings = prom::parse_study_settings(cfg);
    settings.seed = seed;
    prom::CandidateSet grid = prom::CandidateSet::tensor_grid(problem.axes);
    if (!initial_given)
        initial_index = prom::SplitMix64(prom::mix_seed(seed, 7, 0)).next_index(grid.size());
    prom::require(initial_index < grid.size(), "cli: initial index outside the candidate grid");
    const prom::CampaignMode mode =
        mode_str == "adaptive" ? prom::CampaignMode::Adaptive : prom::CampaignMode::Lhs;

    prom::EvaluatedCampaign campaign = prom::run_single_campaign(
        problem, settings, mode, initial_index, std::filesystem::path(out) / "fom_cache");

    prom::StudyResult result;
    result.candidates = grid.candidates();
    for (const prom::AxisSpec& a : problem.axes) result.axis_names.push_back(a.name);
    prom::StudyTrial trial;
    trial.initial_index = initial_index;
    trial.campaigns.push_back(std::move(campaign));
    result.trials.push_back(std::move(trial));
    prom::write_study_csvs(result, out);

    const prom::EvaluatedCampaign& c = result.trials[0].campaigns[0];
    for (std::size_t k = 0; k < c.record.iterations.size(); ++k) {
        const prom::IterationRecord& it = c.record.iterations[k];
        std::printf("n_p=%zu r=%zu lambda=(%g, %g) beta=%g", it.n_p, it.r, it.lambda1, it.lambda2,
                    it.beta);
        if (k < c.reports.size())
            std::printf(" e_total=%g e_proj=%g", c.reports[k].e_total, c.reports[k].e_proj);
        std::printf("\n");
    }
    std::printf("wrote campaign outputs to %s\n", out.c_str());
    return 0;
}

int cmd_study_run(const std::string& config_path, std::size_t trials, bool trials_given,
                  std::uint64_t seed, bool seed_given, const std::string& out) {
    prom::io::Config cfg = prom::io::Config::parse_file(config_path);
    prom::BenchmarkProblem problem = prom::build_problem(cfg);
    prom::StudySettings settings = prom::parse_study_settings(cfg);
    if (trials_given) settings.n_trials = trials;
    if (seed_given) settings.seed = seed;

    prom::StudyResult result =
        prom::run_study(problem, settings, std::filesystem::path(out) / "fom_cache");
    prom::write_study_csvs(result, out);
    prom::write_report_csvs(out, out);

    std::printf("trials=%zu budget=%zu fom_solves=%zu\n", result.trials.size(), settings.budget,
                result.fom_solve_count);
    const auto print_series = [](const char* name, const prom::AggregateSeries& s) {
        for (std::size_t k = 0; k < s.mean_beta.size(); ++k) {
            std::printf("%s n_p=%zu mean_beta=%g", name, k + 1, s.mean_beta[k]);
            if (k < s.geomean_e_total.size())
                std::printf(" geomean_e_total=%g geomean_e_proj=%g", s.geomean_e_total[k],
                            s.geomean_e_proj[k]);
            std::printf("\n");
        }
    };
    print_series("adaptive", result.adaptive);
    print_series("lhs", result.lhs);
    std::printf("wrote study outputs to %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parametric operator-inference ROMs with active parameter sampling"};
    app.require_subcommand(1);

    auto* fom = app.add_subcommand("fom", "full-order model utilities");
    fom->require_subcommand(1);
    auto* fom_solve = fom->add_subcommand("solve", "integrate the FOM at one parameter");
    std::string fs_problem, fs_out, fs_config;
    std::vector<double> fs_param;
    fom_solve->add_option("--problem", fs_problem, "benchmark problem")
        ->required()
        ->check(CLI::IsMember({"heat", "burgers"}));
    fom_solve->add_option("--param", fs_param, "parameter values")->required()->delimiter(',');
    fom_solve->add_option("--out", fs_out, "output matrix path")->required();
    fom_solve->add_option("--config", fs_config, "config file overriding the discretization");

    auto* campaign = app.add_subcommand("campaign", "active-learning campaigns");
    campaign->require_subcommand(1);
    auto* campaign_run = campaign->add_subcommand("run", "run one sampling campaign");
    std::string cr_config, cr_mode = "adaptive", cr_out;
    std::uint64_t cr_seed = 0;
    std::size_t cr_initial = 0;
    campaign_run->add_option("--config", cr_config, "config file")->required();
    campaign_run->add_option("--mode", cr_mode, "sampling mode")
        ->check(CLI::IsMember({"adaptive", "lhs"}));
    campaign_run->add_option("--seed", cr_seed, "campaign seed");
    campaign_run->add_option("--out", cr_out, "output directory")->required();
    auto* cr_initial_opt =
        campaign_run->add_option("--initial", cr_initial, "initial candidate index");

    auto* study = app.add_subcommand("study", "multi-trial sampling studies");
    study->require_subcommand(1);
    auto* study_run = study->add_subcommand("run", "run a full study");
    std::string sr_config, sr_out;
    std::size_t sr_trials = 0;
    std::uint64_t sr_seed = 0;
    study_run->add_option("--config", sr_config, "config file")->required();
    auto* sr_trials_opt = study_run->add_option("--trials", sr_trials, "trial count override");
    auto* sr_seed_opt = study_run->add_option("--seed", sr_seed, "seed override");
    study_run->add_option("--out", sr_out, "output directory")->required();

    auto* report = app.add_subcommand("report", "aggregate study outputs into figure data");
    std::string rp_study, rp_format = "csv", rp_out;
    report->add_option("--study", rp_study, "study output directory")->required();
    report->add_option("--format", rp_format, "output format")->check(CLI::IsMember({"csv"}));
    report->add_option("--out", rp_out, "destination directory (defaults to the study directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fom_solve->parsed()) return cmd_fom_solve(fs_problem, fs_param, fs_out, fs_config);
        if (campaign_run->parsed())
            return cmd_campaign_run(cr_config, cr_mode, cr_seed, cr_out, cr_initial,
                                    cr_initial_opt->count() > 0);
        if (study_run->parsed())
            return cmd_study_run(sr_config, sr_trials, sr_trials_opt->count() > 0, sr_seed,
                                 sr_seed_opt->count() > 0, sr_out);
        if (report->parsed()) {
            prom::write_report_csvs(rp_study, rp_out.empty() ? rp_study : rp_out);
            std::printf("wrote figure_errors.csv and figure_instability.csv\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
