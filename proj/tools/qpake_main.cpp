#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qpake/bounds.hpp"
#include "qpake/config.hpp"
#include "qpake/feasibility.hpp"
#include "qpake/harness.hpp"
#include "qpake/selftest.hpp"

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::uint64_t> trials, std::optional<unsigned> jobs,
            std::optional<std::string> out_dir) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << config_path << "'\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  qpake::Config cfg = qpake::parse_config(buf.str());
  if (seed) cfg.run.seed = *seed;
  if (trials) cfg.run.trials = *trials;
  if (jobs) cfg.run.jobs = *jobs;
  if (out_dir) cfg.out_dir = *out_dir;

  const qpake::ParamsPtr params = cfg.build_params();
  const qpake::ExperimentStats stats =
      qpake::run_experiment(params, cfg.adversary, cfg.run);

  std::cout << "experiment " << stats.config_fingerprint << "\n"
            << "  trials        " << stats.trials << "\n"
            << "  completions   " << stats.completions << "\n"
            << "  aborts        " << stats.aborts << "\n"
            << "  agreements    " << stats.key_agreements << " (rate "
            << stats.agreement_rate() << ")\n"
            << "  guess rate    " << stats.guess_rate() << "\n"
            << "  mean test err " << stats.mean_test_error() << "\n";
  std::cout << stats.to_json() << "\n";

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream stats_out(cfg.out_dir + "/stats.json");
    stats_out << stats.to_json() << "\n";
    std::ofstream config_out(cfg.out_dir + "/config.ini");
    config_out << qpake::serialize_config(cfg);
    if (cfg.record_transcripts) {
      const auto tamper = qpake::make_tamper(cfg.adversary);
      qpake::RunOptions opts;
      opts.record_transcript = true;
      qpake::Rng master(cfg.run.seed);
      qpake::Rng trial_rng = master.split(0);
      const std::uint64_t session_seed = trial_rng.next();
      std::size_t pw_client = 0, pw_server = 0;
      const qpake::SessionResult sample = qpake::run_session(
          params, pw_client, pw_server,
          qpake::resolve_channel(cfg.adversary.quantum), tamper, session_seed,
          opts);
      std::ofstream tr_out(cfg.out_dir + "/transcript.jsonl");
      tr_out << sample.transcript.to_jsonl();
    }
  }
  return 0;
}

int cmd_bounds(double n, double tau, double eps, double lambda, double gamma,
               double beta, double cbar, double delta, std::size_t grid,
               std::optional<double> plan_target, std::size_t dict_size) {
  if (plan_target) {
    const auto plan = qpake::bounds::plan_parameters(
        *plan_target, static_cast<std::size_t>(lambda), tau, dict_size);
    if (!plan.feasible) {
      std::cout << "infeasible at n <= 2^24 for target " << *plan_target
                << "\n";
      return 1;
    }
    std::cout << "plan: n=" << plan.n << " k=" << plan.k
              << " alpha=" << plan.alpha << " ell=" << plan.ell
              << " eps=" << plan.eps << " gamma=" << plan.gamma
              << " beta=" << plan.beta << " eps_sec=" << plan.eps_sec << "\n";
    return 0;
  }

  std::cout << "n        h(tau+eps)   g(eps)       eps_ec       eps_pa       "
               "eps_sec      hmin         hmin_corr    mu_corr\n";
  const std::size_t steps = grid == 0 ? 1 : grid;
  for (std::size_t i = 0; i < steps; ++i) {
    qpake::bounds::BoundsInput in;
    in.n = n * static_cast<double>(i + 1);
    in.tau = tau;
    in.eps = eps;
    in.lambda = lambda;
    in.gamma = gamma;
    in.beta = beta;
    in.cbar = cbar;
    in.delta = delta;
    const auto rep = qpake::bounds::evaluate(in);
    std::ostringstream line;
    line.precision(6);
    line << in.n << " " << rep.h_tau << " " << rep.g_eps << " " << rep.eps_ec
         << " " << rep.eps_pa << " " << rep.eps_sec << " " << rep.hmin_honest
         << " " << rep.hmin_corrupted_client << " " << rep.mu_corrupted;
    std::cout << line.str() << "\n";
    std::cout << "{\"n\":" << in.n << ",\"h\":" << rep.h_tau
              << ",\"g\":" << rep.g_eps << ",\"eps_ec\":" << rep.eps_ec
              << ",\"eps_pa\":" << rep.eps_pa << ",\"eps_sec\":" << rep.eps_sec
              << ",\"hmin\":" << rep.hmin_honest
              << ",\"hmin_corrupted\":" << rep.hmin_corrupted_client
              << ",\"mu_corrupted\":" << rep.mu_corrupted << "}\n";
  }
  return 0;
}

int cmd_otcore(const std::string& table_path, std::size_t equality_size) {
  qpake::TwoPartyFunction fn;
  if (!table_path.empty()) {
    std::ifstream in(table_path);
    if (!in) {
      std::cerr << "error: cannot open table '" << table_path << "'\n";
      return 1;
    }
    fn = qpake::TwoPartyFunction::parse(in);
  } else {
    fn = qpake::TwoPartyFunction::equality(equality_size);
  }
  const auto cores = qpake::find_ot_cores(fn);
  for (const auto& core : cores)
    std::cout << "(" << core.x << "," << core.x_prime << "," << core.y << ","
              << core.y_prime << ")\n";
  std::cout << cores.size() << " OT-core(s)\n";
  return 0;
}

int cmd_selftest() {
  const auto results = qpake::run_acceptance_suite(&std::cout);
  std::size_t passed = 0;
  for (const auto& res : results)
    if (res.pass) ++passed;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return qpake::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Password-authenticated quantum key exchange simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scripted experiment");
  std::string config_path;
  run->add_option("--config", config_path, "Experiment config file")
      ->required();
  std::optional<std::uint64_t> seed_override, trials_override;
  std::optional<unsigned> jobs_override;
  std::optional<std::string> out_override;
  run->add_option("--seed", seed_override, "Master seed override");
  run->add_option("--trials", trials_override, "Trial count override");
  run->add_option("--jobs", jobs_override, "Worker thread count");
  run->add_option("--out", out_override, "Output directory");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Evaluate the security bounds");
  double b_n = 1000, b_tau = 0.05, b_eps = 0.01, b_lambda = 128,
         b_gamma = qpake::bounds::kDefaultGamma,
         b_beta = qpake::bounds::kDefaultBeta, b_cbar = 0.5, b_delta = 0.0;
  std::size_t b_grid = 1, b_dict = 16;
  std::optional<double> b_target;
  bounds->add_option("--n", b_n, "Block length n");
  bounds->add_option("--tau", b_tau, "Error threshold tau");
  bounds->add_option("--eps", b_eps, "Smoothing parameter");
  bounds->add_option("--lambda", b_lambda, "Key length");
  bounds->add_option("--gamma", b_gamma, "Password-code distance rate");
  bounds->add_option("--beta", b_beta, "Code-bias rate");
  bounds->add_option("--cbar", b_cbar, "Overlap constant");
  bounds->add_option("--delta", b_delta, "Decode-failure probability");
  bounds->add_option("--grid", b_grid, "Rows: evaluate at n, 2n, ... grid*n");
  bounds->add_option("--plan", b_target, "Plan smallest n for target eps_sec");
  bounds->add_option("--dict", b_dict, "Dictionary size for planning");

  // otcore
  auto* otcore = app.add_subcommand("otcore", "Find OT-cores of a function");
  std::string table_path;
  std::size_t eq_size = 3;
  otcore->add_option("--table", table_path, "Function table file");
  otcore->add_option("--equality", eq_size, "Use EQUALITY over this alphabet");

  // selftest
  app.add_subcommand("selftest", "Run the full acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed())
      return cmd_run(config_path, seed_override, trials_override,
                     jobs_override, out_override);
    if (bounds->parsed())
      return cmd_bounds(b_n, b_tau, b_eps, b_lambda, b_gamma, b_beta, b_cbar,
                        b_delta, b_grid, b_target, b_dict);
    if (otcore->parsed()) return cmd_otcore(table_path, eq_size);
    return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
