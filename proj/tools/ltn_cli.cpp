#include "ltn/experiment.hpp"
#include "ltn/verification.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)");
  cmd->add_option("--seed", c.seed, "top-level seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--threads", c.threads, "worker threads (env LTN_THREADS)");
}

ltn::ExperimentConfig resolve(const Common& c) {
  ltn::ExperimentConfig cfg = ltn::load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  return cfg;
}

void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LT-N diffusion, influence maximization and online learning experiments"};
  app.require_subcommand(1);
  Common common;

  auto* sim = app.add_subcommand("simulate", "run cascades from a fixed seed set");
  add_common(sim, common);
  std::vector<ltn::NodeId> sim_seeds;
  std::optional<std::size_t> sim_runs;
  std::string sim_model;
  sim->add_option("--seeds", sim_seeds, "seed node ids (overrides config)")->delimiter(',');
  sim->add_option("--runs", sim_runs, "number of cascades (overrides config)");
  sim->add_option("--model", sim_model, "lt | ltn | tsn");

  auto* greedy = app.add_subcommand("greedy", "greedy seed selection with the true weights");
  add_common(greedy, common);

  auto* learn = app.add_subcommand("learn", "run one policy for one repetition");
  add_common(learn, common);
  std::string policy = "grd_explr_q=1";
  learn->add_option("--policy", policy, "policy name");

  auto* experiment = app.add_subcommand("experiment", "run all policies and repetitions");
  add_common(experiment, common);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify, common);
  std::string suite = "all";
  verify->add_option("suite", suite, "submodularity | equivalence | eigenvalue | greedy_ratio | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ltn::ExperimentConfig cfg = resolve(common);
    const std::filesystem::path out(common.out);
    if (*sim) {
      if (!sim_seeds.empty()) cfg.seeds = sim_seeds;
      if (sim_runs) cfg.runs = *sim_runs;
      if (!sim_model.empty()) cfg.simulate_model = ltn::parse_model(sim_model);
      cfg.validate();
      const ltn::Instance inst = ltn::build_instance(cfg);
      std::cout << ltn::simulate(cfg, inst, out).dump(2) << '\n';
    } else if (*greedy) {
      const ltn::Instance inst = ltn::build_instance(cfg);
      const auto report = ltn::greedy_report(cfg, inst);
      write_json(out / "greedy.json", report);
      std::cout << report.dump(2) << '\n';
    } else if (*learn) {
      cfg.policies = {policy};
      cfg.repetitions = 1;
      cfg.validate();
      const ltn::Instance inst = ltn::build_instance(cfg);
      std::ofstream obs_out;
      if (cfg.dump_observations) {
        std::filesystem::create_directories(out);
        obs_out.open(out / "observations.csv");
        ltn::write_observations_csv_header(obs_out, inst.graph.edge_feature_dim());
      }
      ltn::ObservationSink sink;
      if (cfg.dump_observations)
        sink = [&obs_out](const std::string&, std::size_t, std::int64_t t,
                          const std::vector<ltn::RoundObservation>& obs) {
          ltn::write_observations_csv(obs_out, static_cast<std::size_t>(t), obs);
        };
      // A single run, so the sink is never called concurrently.
      ltn::ExperimentResult res = ltn::run_experiment(cfg, inst, sink);
      ltn::write_experiment_outputs(cfg, res, out);
      std::cout << "wrote " << res.runs.size() << " run(s) to " << out << '\n';
    } else if (*experiment) {
      const ltn::Instance inst = ltn::build_instance(cfg);
      const ltn::ExperimentResult res = ltn::run_experiment(cfg, inst);
      ltn::write_experiment_outputs(cfg, res, out);
      std::cout << "wrote " << res.runs.size() << " run(s) to " << out << '\n';
    } else if (*verify) {
      const ltn::VerifyReport report = ltn::run_verify_suite(suite, cfg.seed);
      const auto j = report.to_json();
      write_json(out / ("verify_" + suite + ".json"), j);
      std::cout << j.dump(2) << '\n';
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
