#include "dsm_cli/commands.hpp"

#include <CLI11.hpp>

#include "dsm/asymptotics.hpp"
#include "dsm/continuation.hpp"
#include "dsm/errors.hpp"
#include "dsm/linear_analysis.hpp"
#include "dsm/motility.hpp"
#include "dsm/pde_solver.hpp"
#include "dsm_cli/reproduce.hpp"

namespace dsm::cli {
namespace {

using nlohmann::json;

std::ostream& log_of(const RunContext& ctx) {
  static std::ostream null(nullptr);
  return ctx.log ? *ctx.log : null;
}

// Message without the "code: " prefix that Error adds.
std::string bare_message(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

// Invalid values caught by module validators are configuration errors here.
template <class Fn>
auto as_config(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw ConfigError(where + ": " + bare_message(e));
    throw;
  }
}

// Re-raise module failures with the command name in front.
template <class Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + bare_message(e));
  }
}

json to_json(const ModeTransition& e) {
  json j{{"from", e.from}, {"to", e.to}, {"t_onset", e.t_onset}, {"t_cross", e.t_cross}};
  j["t_settled"] = e.t_settled ? json(*e.t_settled) : json(nullptr);
  return j;
}

json motility_json(const MotilityModel& m) {
  const auto t = taylor_at_unity(m);
  return {{"label", m.describe()}, {"r_1", t.r0}, {"dr_1", t.r1}, {"d2r_1", t.r2}, {"d3r_1", t.r3}};
}

}  // namespace

Metadata RunContext::metadata(const std::string& command) const {
  return Metadata{toolkit_version(), cfg.hash, cfg.seed, command};
}

int run_analyze(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto m = as_config("motility", [&] { return cfg.motility.build(); });
  as_config("params", [&] { cfg.params.validate(); return 0; });
  const auto cls = with_context("analyze", [&] {
    return classify_uniform_state(cfg.params, m, cfg.j_max);
  });
  const auto meta = ctx.metadata("analyze");

  std::optional<BifurcationSummary> summary;
  std::string note;
  if (cls.verdict != UniformStability::StableByMonotonicity) {
    summary = with_context("analyze", [&] {
      return cfg.j_max > 0 ? scan_modes(cfg.params, m, cfg.j_max) : scan_modes(cfg.params, m);
    });
  } else {
    note = "r'(1) + r(1) >= 0: no instability window";
  }

  CsvWriter csv(ctx.out_dir / "modes.csv", meta, {"j", "lambda_j", "sigma_j", "a_j", "rho_max_real"});
  if (summary) {
    for (const auto& mode : summary->modes) {
      ModelParams p = cfg.params;
      const double rho = dispersion_roots(mode.lambda_j, p, m).first.real();
      csv << mode.j << mode.lambda_j << mode.sigma_j << mode.a_j << rho;
      csv.end_row();
    }
  }

  json body{{"classification", std::string(to_string(cls.verdict))},
            {"unstable_modes", cls.unstable_modes},
            {"max_growth", cls.max_growth},
            {"classification_window", cls.j_max},
            {"params", {{"D", cfg.params.D}, {"sigma", cfg.params.sigma}, {"l", cfg.params.l}}},
            {"motility", motility_json(m)}};
  if (summary) {
    body["i_c"] = summary->i_c;
    body["i_a"] = summary->i_a;
    body["sigma_a"] = summary->sigma_a;
    body["sigma_c"] = summary->sigma_c;
    body["lambda_star"] = summary->lambda_star;
    body["ordering"] = summary->ordering;
  } else {
    for (const char* k : {"i_c", "i_a", "sigma_a", "sigma_c", "lambda_star"}) body[k] = nullptr;
    body["note"] = note;
  }
  write_json(ctx.out_dir / "summary.json", meta, body);

  auto& log = log_of(ctx);
  log << "classification: " << to_string(cls.verdict) << "\n";
  if (summary) {
    log << "i_c=" << summary->i_c << " i_a=" << summary->i_a
        << " sigma_a=" << report_number(summary->sigma_a)
        << " sigma_c=" << report_number(summary->sigma_c)
        << " lambda*=" << report_number(summary->lambda_star) << "\n";
  }
  return kOk;
}

int run_expand(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto m = as_config("motility", [&] { return cfg.motility.build(); });
  ModelParams p = cfg.params;
  as_config("params", [&] { p.validate(); return 0; });
  const auto summary = with_context("expand", [&] { return scan_modes(p, m); });
  std::vector<int> modes = cfg.modes;
  if (modes.empty()) {
    for (int j = 1; j <= summary.i_c; ++j) modes.push_back(j);
  }
  std::vector<Expansion> rows;
  for (int j : modes) {
    rows.push_back(with_context("expand.modes: j=" + std::to_string(j),
                                [&] { return expansion_coefficients(j, p, m, summary); }));
  }

  const auto meta = ctx.metadata("expand");
  CsvWriter csv(ctx.out_dir / "expansion.csv", meta,
                {"j", "sigma0", "sigma2", "a", "c", "d1", "d2", "d3", "d4", "eta_if_admissible",
                 "verdict"});
  json table = json::array();
  for (const auto& e : rows) {
    const std::string v = e.verdict ? std::string(to_string(*e.verdict)) : "";
    csv << e.j << e.sigma0 << e.sigma2 << e.a << e.c << e.d1 << e.d2 << e.d3 << e.d4;
    if (e.eta) {
      csv << *e.eta;
    } else {
      csv << std::string();
    }
    csv << v;
    csv.end_row();
    json row{{"j", e.j},   {"sigma0", e.sigma0}, {"sigma2", e.sigma2}, {"a", e.a},
             {"c", e.c},   {"d1", e.d1},         {"d2", e.d2},         {"d3", e.d3},
             {"d4", e.d4}, {"verdict", v}};
    row["eta"] = e.eta ? json(*e.eta) : json(nullptr);
    row["gamma2"] = e.gamma2 ? json(*e.gamma2) : json(nullptr);
    table.push_back(row);
  }
  write_json(ctx.out_dir / "expansion.json", meta,
             {{"i_a", summary.i_a}, {"modes", table}, {"motility", motility_json(m)}});

  auto& log = log_of(ctx);
  for (const auto& e : rows) {
    log << "j=" << e.j << " sigma0=" << report_number(e.sigma0)
        << " sigma2=" << report_number(e.sigma2);
    if (e.eta) log << " eta=" << report_number(*e.eta);
    if (e.verdict) log << " " << to_string(*e.verdict);
    log << "\n";
  }
  return kOk;
}

int run_simulate(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto sim = as_config("simulate", [&] {
    auto c = cfg.sim_config();
    c.validate();
    return c;
  });
  sim.keep_snapshots = false;
  const auto meta = ctx.metadata("simulate");
  const auto& block = cfg.simulate;

  std::optional<CsvWriter> csv;
  std::optional<BinarySnapshotWriter> bin;
  if (block.format == "csv") {
    csv.emplace(ctx.out_dir / "snapshots.csv", meta, std::vector<std::string>{"t", "x", "u", "v"});
  } else {
    bin.emplace(ctx.out_dir / "snapshots.bin", meta, sim.n, sim.params.l);
  }
  auto observer = [&](double t, const Field& f) {
    if (bin) {
      bin->write(t, f);
      return;
    }
    for (int i = 0; i <= f.n(); ++i) {
      *csv << t << f.x(i) << f.u[static_cast<std::size_t>(i)] << f.v[static_cast<std::size_t>(i)];
      csv->end_row();
    }
  };
  const auto traj = with_context("simulate", [&] { return simulate(sim, observer); });

  JsonLinesWriter events(ctx.out_dir / "events.jsonl", meta);
  for (const auto& e : traj.events) events.write(to_json(e));

  const auto spectrum = modal_spectrum(traj.final);
  const double peaks = count_peaks(traj.final);
  json init = block.init.kind == "asymptotic"
                  ? json{{"kind", "asymptotic"}, {"j", block.init.j}, {"epsilon", block.init.epsilon},
                         {"u1_scale", block.init.u1_scale}}
                  : json{{"kind", "uniform_perturbed"}, {"amplitude", block.init.amplitude},
                         {"seed", cfg.seed}};
  write_json(ctx.out_dir / "summary.json", meta,
             {{"n", sim.n},
              {"sigma", sim.params.sigma},
              {"init", init},
              {"noise", {{"amplitude", block.noise}, {"seed", cfg.seed}, {"mirror", block.noise_mirror}}},
              {"t_final", traj.t_final},
              {"steps", traj.steps},
              {"steady", traj.steady},
              {"t_end_reached", traj.t_end_reached},
              {"final_dominant_mode", spectrum.dominant},
              {"final_peaks", peaks},
              {"final_u_min", *std::min_element(traj.final.u.begin(), traj.final.u.end())},
              {"final_u_max", *std::max_element(traj.final.u.begin(), traj.final.u.end())},
              {"transitions", traj.events.size()}});

  auto& log = log_of(ctx);
  log << "t=" << report_number(traj.t_final) << " steps=" << traj.steps
      << (traj.steady ? " steady" : " not steady") << " dominant=" << spectrum.dominant
      << " peaks=" << report_number(peaks) << "\n";
  for (const auto& e : traj.events) {
    log << "  " << e.from << "->" << e.to << " onset=" << report_number(e.t_onset)
        << " cross=" << report_number(e.t_cross);
    if (e.t_settled) log << " settled=" << report_number(*e.t_settled);
    log << "\n";
  }
  return kOk;
}

int run_continue(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto m = as_config("motility", [&] { return cfg.motility.build(); });
  ModelParams p = cfg.params;
  as_config("params", [&] { p.validate(); return 0; });
  const auto& c = cfg.cont;
  const auto branch = with_context("continue", [&] {
    return trace_branch(c.j, p, m, c.sigma_min, c.ds, c.options);
  });

  const auto meta = ctx.metadata("continue");
  CsvWriter csv(ctx.out_dir / "branch.csv", meta, {"j", "sigma", "amplitude", "newton_iters", "residual"});
  for (const auto& pt : branch.points) {
    csv << branch.j << pt.sigma << pt.amplitude << pt.newton_iters << pt.residual;
    csv.end_row();
  }
  json body{{"j", branch.j},
            {"n", c.options.n},
            {"sigma_min", c.sigma_min},
            {"points", branch.points.size()},
            {"termination", std::string(to_string(branch.termination))}};
  if (!branch.points.empty()) {
    body["sigma_first"] = branch.points.front().sigma;
    body["sigma_last"] = branch.points.back().sigma;
    body["amplitude_last"] = branch.points.back().amplitude;
  }
  write_json(ctx.out_dir / "summary.json", meta, body);
  log_of(ctx) << "branch j=" << branch.j << ": " << branch.points.size() << " points, "
              << to_string(branch.termination) << "\n";
  return kOk;
}

int run_reproduce_paper(const RunContext& ctx) {
  as_config("motility", [&] { return ctx.cfg.motility.build(); });
  const auto report = run_reproduction(ctx.cfg, ctx.threads);
  write_report(report, ctx.out_dir, ctx.metadata("reproduce-paper"));
  print_report(report, log_of(ctx));
  return report.failures() == 0 ? kOk : kReproductionMismatch;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dsm: density-suppressed motility toolkit"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    sub->add_option("--threads", threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunContext&);
  };
  const Command commands[] = {
      {"analyze", "linear analysis of the uniform state", run_analyze},
      {"expand", "weakly nonlinear coefficients per mode", run_expand},
      {"simulate", "time integration", run_simulate},
      {"continue", "trace a steady branch", run_continue},
      {"reproduce-paper", "run the reproduction table", run_reproduce_paper},
  };
  for (const auto& c : commands) add_common(app.add_subcommand(c.name, c.help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunContext ctx;
    ctx.cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (seed) ctx.cfg.seed = *seed;
    ctx.out_dir = out_dir.empty() ? ctx.cfg.output_dir : std::filesystem::path(out_dir);
    ctx.threads = threads;
    ctx.log = &out;
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) return c.run(ctx);
    }
  } catch (const ConfigError& e) {
    err << "dsm: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "dsm: " << e.what() << "\n";
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "dsm: error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}

}  // namespace dsm::cli
