// Command-line front end: train experiments, verify derivatives against
// finite differences, dump grid references, and evaluate checkpoints.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "infsup/experiment.hpp"
#include "infsup/gradcheck.hpp"
#include "infsup/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;   // verification failed / internal error
constexpr int kExitConfig = 2;    // bad configuration or usage
constexpr int kExitDiverged = 3;  // training aborted on divergence

double parse_spacing(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return std::stod(text);
  return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
}

std::string default_out_dir() {
  const char* env = std::getenv("INFSUP_OUT_DIR");
  return env && *env ? env : "out";
}

int cmd_run(const std::string& config_path, const std::string& preset_name,
            const std::string& out_override, int iters_override,
            long long seed_override, bool dump_config) {
  infsup::RunConfig cfg;
  if (!config_path.empty() && !preset_name.empty()) {
    std::cerr << "run: give either --config or --preset, not both\n";
    return kExitConfig;
  }
  if (!config_path.empty())
    cfg = infsup::RunConfig::parse_file(config_path);
  else if (!preset_name.empty())
    cfg = infsup::preset(preset_name);
  else {
    std::cerr << "run: need --config FILE or --preset NAME\n";
    return kExitConfig;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
  if (iters_override >= 0) cfg.train.iters = iters_override;
  if (seed_override >= 0)
    cfg.train.seed = static_cast<std::uint64_t>(seed_override);
  if (dump_config) {
    std::cout << cfg.serialize();
    return kExitOk;
  }
  const infsup::ExperimentResult res = infsup::run_experiment(cfg, &std::cout);
  return res.status == infsup::TrainStatus::kOk ? kExitOk : kExitDiverged;
}

int cmd_gradcheck(std::uint64_t seed, int d, int width, int depth,
                  const std::string& problem_name, int m, int pairs,
                  bool corrupt) {
  const infsup::PdeProblem prob = infsup::make_builtin(problem_name, d, m);
  std::vector<int> arch{prob.dim()};
  for (int i = 0; i < depth; ++i) arch.push_back(width);
  arch.push_back(1);

  infsup::JetCheckReport jets;
  infsup::AdjointCheckReport adj;
  for (int i = 0; i < pairs; ++i) {
    infsup::MlpNet u = infsup::init_xavier(arch, seed + 2 * i);
    infsup::MlpNet v = infsup::init_xavier(arch, seed + 2 * i + 1);
    infsup::SplitRng pr = infsup::SplitRng(seed + i).split(9);
    const Eigen::MatrixXd pts = prob.domain.sample_interior(4, pr);
    const infsup::JetCheckReport r = infsup::check_jets(u, pts);
    jets.max_value_dev = std::max(jets.max_value_dev, r.max_value_dev);
    jets.max_grad_dev = std::max(jets.max_grad_dev, r.max_grad_dev);
    jets.max_lap_dev = std::max(jets.max_lap_dev, r.max_lap_dev);

    infsup::SplitRng ri = infsup::SplitRng(seed + i).split(1);
    infsup::SplitRng rb = infsup::SplitRng(seed + i).split(2);
    const infsup::Batch batch = infsup::draw_batch(prob.domain, 10, 8, ri, rb);
    const infsup::AdjointCheckReport a = infsup::check_loss_adjoints(
        prob, u, v, batch, 1e-5, corrupt ? static_cast<int>(i) : -1);
    adj.max_theta_dev = std::max(adj.max_theta_dev, a.max_theta_dev);
    adj.max_tau_dev = std::max(adj.max_tau_dev, a.max_tau_dev);
  }

  const bool ok = jets.max_grad_dev <= 1e-7 && jets.max_lap_dev <= 1e-6 &&
                  jets.max_value_dev <= 1e-12 && adj.max_theta_dev <= 1e-5 &&
                  adj.max_tau_dev <= 1e-5;
  std::printf("gradcheck problem=%s d=%d arch=%dx%d pairs=%d\n",
              problem_name.c_str(), prob.dim(), depth, width, pairs);
  std::printf("  value    dev %.3e  (tol 1e-12)\n", jets.max_value_dev);
  std::printf("  gradient dev %.3e  (tol 1e-7)\n", jets.max_grad_dev);
  std::printf("  laplace  dev %.3e  (tol 1e-6)\n", jets.max_lap_dev);
  std::printf("  adjoint  dev %.3e / %.3e  (tol 1e-5)\n", adj.max_theta_dev,
              adj.max_tau_dev);
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitFailure;
}

int cmd_reference(const std::string& problem_name, int d,
                  const std::string& h_text, const std::string& out_path) {
  const infsup::PdeProblem prob = infsup::make_builtin(problem_name, d);
  const infsup::FdSolution sol =
      infsup::solve_poisson_fd(prob, parse_spacing(h_text));
  infsup::write_reference_csv(out_path, sol);
  std::printf("reference %s h=%s -> %s\n", problem_name.c_str(),
              h_text.c_str(), out_path.c_str());
  return kExitOk;
}

int cmd_eval(const std::string& ckpt, const std::string& problem_name, int d,
             int m, int n, std::uint64_t seed, const std::string& h_text) {
  infsup::PdeProblem prob = infsup::make_builtin(problem_name, d, m);
  if (!prob.has_exact())
    prob.exact = infsup::fd_reference_field(prob, parse_spacing(h_text));
  const infsup::MlpNet net = infsup::MlpNet::load(ckpt);
  // Same derived stream as the trainer's held-out test set.
  infsup::SplitRng rng = infsup::SplitRng(seed).split(3);
  const Eigen::MatrixXd pts = prob.domain.sample_interior(n, rng);
  const double err = infsup::rel_l2_error(net, prob.exact, pts);
  std::printf("rel_l2 %.17g\n", err);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax training of neural solutions to elliptic problems"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Train from a config file or preset");
  std::string config_path, preset_name, out_override;
  int iters_override = -1;
  long long seed_override = -1;
  bool dump_config = false, list_presets = false;
  run->add_option("--config", config_path, "run config file");
  run->add_option("--preset", preset_name, "named experiment preset");
  run->add_option("--out", out_override, "output directory");
  run->add_option("--iters", iters_override, "override iteration count");
  run->add_option("--seed", seed_override, "override RNG seed");
  run->add_flag("--dump-config", dump_config,
                "print effective config, don't run");
  run->add_flag("--list-presets", list_presets, "list preset names");

  auto* gc = app.add_subcommand(
      "gradcheck", "verify jets and adjoints against finite differences");
  std::uint64_t gc_seed = 1;
  int gc_d = 3, gc_width = 20, gc_depth = 2, gc_m = 2, gc_pairs = 10;
  std::string gc_problem = "poisson";
  bool gc_corrupt = false;
  gc->add_option("--seed", gc_seed);
  gc->add_option("--d", gc_d);
  gc->add_option("--width", gc_width);
  gc->add_option("--depth", gc_depth);
  gc->add_option("--problem", gc_problem);
  gc->add_option("--m", gc_m);
  gc->add_option("--pairs", gc_pairs);
  gc->add_flag("--corrupt-adjoint", gc_corrupt,
               "negative control: bump one adjoint entry");

  auto* ref = app.add_subcommand("reference", "dump a grid reference as CSV");
  std::string ref_problem = "lshape", ref_h = "1/128",
              ref_out = "reference.csv";
  int ref_d = 2;
  ref->add_option("--problem", ref_problem);
  ref->add_option("--d", ref_d);
  ref->add_option("--grid-h", ref_h, "grid spacing, decimal or p/q");
  ref->add_option("--out", ref_out);

  auto* ev = app.add_subcommand("eval", "load a checkpoint, report rel-L2");
  std::string ev_ckpt, ev_problem = "poisson", ev_h = "1/128";
  int ev_d = 3, ev_m = 2, ev_n = 4000;
  std::uint64_t ev_seed = 1;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--problem", ev_problem);
  ev->add_option("--d", ev_d);
  ev->add_option("--m", ev_m);
  ev->add_option("--n", ev_n, "test sample count");
  ev->add_option("--seed", ev_seed);
  ev->add_option("--fd-h", ev_h, "reference spacing for lshape/mixed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      if (list_presets) {
        for (const auto& n : infsup::preset_names()) std::cout << n << "\n";
        return kExitOk;
      }
      return cmd_run(config_path, preset_name, out_override, iters_override,
                     seed_override, dump_config);
    }
    if (gc->parsed())
      return cmd_gradcheck(gc_seed, gc_d, gc_width, gc_depth, gc_problem, gc_m,
                           gc_pairs, gc_corrupt);
    if (ref->parsed())
      return cmd_reference(ref_problem, ref_d, ref_h, ref_out);
    if (ev->parsed())
      return cmd_eval(ev_ckpt, ev_problem, ev_d, ev_m, ev_n, ev_seed, ev_h);
  } catch (const infsup::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
