// Command-line front end: one subcommand per experiment, JSON config or
// inline flags, CSV on stdout (and optionally --out).

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "treerange/harness.hpp"

namespace {

using treerange::harness::ExperimentConfig;

struct CliState {
  std::string config_path;
  ExperimentConfig cfg;
  bool have_n = false, have_horizon = false, have_k = false, have_m = false,
       have_jmax = false;
};

void add_common(CLI::App* sub, CliState& st) {
  sub->add_option("--config", st.config_path, "JSON config file");
  sub->add_option("--dim", st.cfg.dim, "lattice dimension");
  sub->add_option("--n", st.cfg.n, "size parameter");
  sub->add_option("--p", st.cfg.p, "initial population");
  sub->add_option("--reps", st.cfg.reps, "replica count");
  sub->add_option("--seed", st.cfg.seed, "base seed");
  sub->add_option("--workers", st.cfg.workers, "worker threads");
  sub->add_option("--out", st.cfg.out, "output CSV path");
}

int run_config(ExperimentConfig cfg) {
  treerange::harness::apply_env_seed(cfg);
  std::ostringstream csv;
  int code = treerange::harness::run(cfg, csv, std::cerr);
  std::cout << csv.str();
  if (!cfg.out.empty() && cfg.experiment != "brw") {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      std::cerr << "io error: cannot open " << cfg.out << "\n";
      return 2;
    }
    f << csv.str();
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and exact computations for the range of "
               "tree-indexed random walks and branching random walks"};
  app.require_subcommand(1);

  const std::vector<std::string> experiments = {
      "infinite-range", "no-return",    "constant-formula", "conditioned-range",
      "snake-free",     "snake-excursion", "head-return-exact", "no-return-head",
      "green",          "green-sum",    "suffcond",         "bessel",
      "brw",            "verify"};

  std::vector<std::unique_ptr<CliState>> states;
  for (const std::string& name : experiments) {
    auto st = std::make_unique<CliState>();
    st->cfg.experiment = name;
    CLI::App* sub = app.add_subcommand(name, name + " experiment");
    add_common(sub, *st);
    if (name == "no-return") sub->add_option("--horizon", st->cfg.horizon);
    if (name == "constant-formula" || name == "suffcond") {
      sub->add_option("--j-max", st->cfg.j_max);
      sub->add_option("--box-radius", st->cfg.box_radius);
      sub->add_option("--h-reps", st->cfg.h_reps);
    }
    if (name == "head-return-exact") sub->add_option("--k", st->cfg.k);
    if (name == "no-return-head") {
      sub->add_option("--stop-p", [st = st.get()](CLI::results_t res) {
        st->cfg.stop_p = std::stoll(res[0]);
        return true;
      }, "stop when the lifetime first drops by p");
    }
    if (name == "green") {
      sub->add_option("--x", st->cfg.x, "lattice point coordinates")
          ->delimiter(',');
      sub->add_option("--eps", st->cfg.eps, "certified error target");
    }
    if (name == "green-sum") {
      sub->add_option("--m", st->cfg.m);
      sub->add_option("--box-radius", st->cfg.box_radius);
    }
    if (name == "bessel") {
      sub->add_option("--r", st->cfg.r);
      sub->add_option("--t", st->cfg.t);
      sub->add_option("--dt", st->cfg.dt);
    }
    if (name == "brw") sub->add_option("--cap", st->cfg.cap);
    if (name == "verify") sub->add_option("--level", st->cfg.level);
    sub->callback([st = st.get()]() {
      ExperimentConfig cfg = st->cfg;
      if (!st->config_path.empty()) {
        std::ifstream f(st->config_path);
        if (!f) {
          std::cerr << "config error: cannot open " << st->config_path << "\n";
          std::exit(2);
        }
        std::stringstream buf;
        buf << f.rdbuf();
        try {
          ExperimentConfig loaded =
              treerange::harness::parse_config(buf.str());
          loaded.experiment = cfg.experiment;
          cfg = loaded;
        } catch (const std::exception& e) {
          std::cerr << e.what() << "\n";
          std::exit(2);
        }
      }
      std::exit(run_config(cfg));
    });
    states.push_back(std::move(st));
  }

  CLI11_PARSE(app, argc, argv);
  return 0;
}
