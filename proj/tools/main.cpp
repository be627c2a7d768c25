#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include "uavrl/config.hpp"
#include "uavrl/eval.hpp"
#include "uavrl/plot.hpp"
#include "uavrl/trajectory.hpp"
#include "uavrl/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uavrl;

namespace {

// Everything a command reads from disk, resolved and parsed up front so
// that no output is produced when validation fails.
struct CommonInputs {
  std::string vehicle_file, gains_file, episode_file, rl_file;
  VehicleParams vehicle = calibrated_octorotor();
  CascadeGains gains = baseline_gains();
  EpisodeConfig episode;
  RlHyperparams rl;

  void load() {
    if (!vehicle_file.empty()) vehicle = vehicle_from_ini(load_ini_file(vehicle_file));
    if (!gains_file.empty()) gains = gains_from_ini(load_ini_file(gains_file));
    if (!episode_file.empty()) episode = episode_from_ini(load_ini_file(episode_file));
    if (!rl_file.empty()) rl = rl_from_ini(load_ini_file(rl_file));
  }

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--vehicle", vehicle_file, "Vehicle parameter file");
    cmd->add_option("--gains", gains_file, "Cascade gain file");
    cmd->add_option("--episode", episode_file, "Episode config file");
    cmd->add_option("--rl", rl_file, "RL hyperparameter file");
  }
};

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> artifacts;

  void add(const std::string& file, std::uint64_t s) { artifacts.emplace_back(file, s); }
  void write(const fs::path& out_dir) const {
    json j;
    j["command"] = command;
    j["seed"] = seed;
    json arts = json::array();
    for (const auto& [file, s] : artifacts) arts.push_back({{"file", file}, {"seed", s}});
    j["artifacts"] = arts;
    std::ofstream f(out_dir / "manifest.json");
    if (!f) throw std::runtime_error("cannot write manifest.json");
    f << j.dump(2) << "\n";
  }
};

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw CLI::ValidationError("--out", "output directory is required");
  fs::create_directories(out);
  return fs::path(out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for write");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

WindField wind_from_flag(const std::string& spec) {
  try {
    return parse_wind_spec(spec);
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--wind", e.what());
  }
}

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "controller,heading_deg,magnitude,seed,total_reward,completion\n";
  for (const SweepRow& r : rows) {
    out += r.controller + "," + csv_num(r.heading_deg) + "," + csv_num(r.magnitude) +
           "," + std::to_string(r.seed) + "," + csv_num(r.total_reward) + "," +
           csv_num(r.completion) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- tune

struct TuneArgs {
  CommonInputs in;
  std::string out, space_file, wind_spec = "0", mode = "pid", compare_with;
  int trials = 50;
  std::uint64_t seed = 0;
  int eval_episodes = 10;
  long rl_train_episodes = 150;
  bool serial = false;
  bool fresh = false;
};

int cmd_tune(const TuneArgs& a) {
  const WindField wind = wind_from_flag(a.wind_spec);
  const ControlMode mode =
      a.mode == "rl" ? ControlMode::rl_supervised : ControlMode::pid_only;
  CommonInputs in = a.in;
  in.load();
  const SearchSpace space = space_from_ini(load_ini_file(a.space_file));
  std::vector<TrialRecord> other;
  if (!a.compare_with.empty()) other = read_trial_log(a.compare_with);
  const fs::path out = prepare_out(a.out);

  TuneOptions opt;
  opt.eval_episodes = a.eval_episodes;
  opt.rl_train_episodes = a.rl_train_episodes;
  opt.log_path = (out / "trials.jsonl").string();
  opt.parallel = !a.serial;
  opt.resume = !a.fresh;
  if (a.fresh) fs::remove(opt.log_path);

  const auto records = tune(space, mode, wind, a.trials, a.seed, in.gains,
                            in.episode, in.rl, in.vehicle, opt);

  Manifest manifest;
  manifest.command = "tune";
  manifest.seed = a.seed;
  manifest.add("trials.jsonl", a.seed);

  const int k = std::min<int>(10, a.trials);
  {
    std::string csv = "parameter,mean,std_pct\n";
    for (const auto& [key, st] : top_table(records, k))
      csv += key + "," + csv_num(st.mean) + "," + csv_num(st.std_pct) + "\n";
    write_text(out / "top_table.csv", csv);
    manifest.add("top_table.csv", a.seed);
  }
  if (static_cast<int>(records.size()) >= 30) {
    std::string csv = "parameter,importance\n";
    for (const auto& [key, v] : importance(records))
      csv += key + "," + csv_num(v) + "\n";
    write_text(out / "importance.csv", csv);
    manifest.add("importance.csv", a.seed);
  } else {
    std::fprintf(stderr, "tune: %d trials < 30, skipping importance\n", a.trials);
  }
  if (!other.empty()) {
    std::string csv =
        "parameter,nominal_mean,nominal_std_pct,wind_mean,wind_std_pct,change_pct,"
        "notable\n";
    for (const auto& [key, row] : compare_top(other, records, std::min<int>(k, 10)))
      csv += key + "," + csv_num(row.nominal.mean) + "," +
             csv_num(row.nominal.std_pct) + "," + csv_num(row.wind.mean) + "," +
             csv_num(row.wind.std_pct) + "," + csv_num(row.change_pct) + "," +
             (row.notable ? "true" : "false") + "\n";
    write_text(out / "table_compare.csv", csv);
    manifest.add("table_compare.csv", a.seed);
  }

  // Best-trial configuration, ready to fly.
  const TrialRecord* best = &records.front();
  for (const TrialRecord& r : records)
    if (r.mean_reward > best->mean_reward) best = &r;
  CascadeGains best_gains = in.gains;
  EpisodeConfig best_episode = in.episode;
  RlHyperparams best_rl = in.rl;
  apply_assignment(best->params, best_gains, best_episode, best_rl);
  write_text(out / "best_gains.ini", write_ini(to_ini(best_gains)));
  manifest.add("best_gains.ini", a.seed);
  if (mode == ControlMode::rl_supervised) {
    write_text(out / "best_episode.ini", write_ini(to_ini(best_episode)));
    write_text(out / "best_rl.ini", write_ini(to_ini(best_rl)));
    manifest.add("best_episode.ini", a.seed);
    manifest.add("best_rl.ini", a.seed);
  }
  manifest.write(out);
  std::printf("tune: %zu trials, best mean reward %.3f (trial %d)\n", records.size(),
              best->mean_reward, best->id);
  return 0;
}

// --------------------------------------------------------------- train

struct TrainArgs {
  CommonInputs in;
  std::string out, wind_spec = "0";
  long episodes = 300;
  std::uint64_t seed = 0;
  bool serial = false;
};

int cmd_train(const TrainArgs& a) {
  const WindField wind = wind_from_flag(a.wind_spec);
  CommonInputs in = a.in;
  in.load();
  const fs::path out = prepare_out(a.out);

  const EnvFactory factory = [&](int) {
    return std::make_unique<Episode>(in.vehicle, in.gains, in.episode, wind);
  };
  const TrainResult result = train(factory, in.rl, a.episodes, a.seed, !a.serial);

  save_checkpoint_file(result.params, (out / "checkpoint.bin").string());
  std::string csv = "update,mean_episode_reward,surrogate,value_loss,entropy\n";
  for (const CurvePoint& p : result.curve)
    csv += std::to_string(p.update) + "," + csv_num(p.mean_episode_reward) + "," +
           csv_num(p.surrogate) + "," + csv_num(p.value_loss) + "," +
           csv_num(p.entropy) + "\n";
  write_text(out / "curve.csv", csv);

  Manifest manifest;
  manifest.command = "train";
  manifest.seed = a.seed;
  manifest.add("checkpoint.bin", a.seed);
  manifest.add("curve.csv", a.seed);
  manifest.write(out);
  std::printf("train: %ld episodes, %zu updates\n", result.episodes,
              result.curve.size());
  return 0;
}

// ----------------------------------------------------------------- fly

struct FlyArgs {
  CommonInputs in;
  std::string out, trajectory_file, wind_spec = "0", mode = "pid", policy_file;
  int wind_onset_segment = 0;
  std::uint64_t seed = 0;
  bool fixed_start = false;
};

int cmd_fly(const FlyArgs& a) {
  const WindField wind = wind_from_flag(a.wind_spec);
  const ControlMode mode =
      a.mode == "rl" ? ControlMode::rl_supervised : ControlMode::pid_only;
  if (mode == ControlMode::rl_supervised && a.policy_file.empty())
    throw CLI::ValidationError("--policy", "rl mode requires a checkpoint");
  CommonInputs in = a.in;
  in.load();
  const Trajectory base = load_trajectory_file(a.trajectory_file);
  Trajectory traj = decompose(base.waypoints, in.episode.bounding_box);
  traj.name = base.name;

  PolicyParameters policy;
  if (mode == ControlMode::rl_supervised) {
    policy = load_checkpoint_file(a.policy_file);
    const PolicyParameters want =
        PolicyParameters::make(in.rl.hidden_width, in.rl.hidden_depth);
    require_shapes(policy, want.actor.dims(), want.critic.dims());
  }
  const fs::path out = prepare_out(a.out);

  FlightOptions opt;
  opt.wind_onset_segment = a.wind_onset_segment;
  opt.randomize_start = !a.fixed_start;
  const FlightResult result =
      fly(traj, mode, in.gains,
          mode == ControlMode::rl_supervised ? &policy : nullptr, wind, in.episode,
          in.vehicle, a.seed, opt);
  const FlightScore sc = score(result);

  std::string csv = tick_log_header(true) + "\n";
  for (const TickRow& row : result.log) csv += tick_log_row(row, true) + "\n";
  write_text(out / "flight_log.csv", csv);

  IniDoc summary;
  summary.set("summary", "trajectory", traj.name);
  summary.set("summary", "mode", a.mode);
  summary.set_double("summary", "total_reward", sc.total_reward);
  summary.set_double("summary", "completion", sc.completion);
  summary.set_double("summary", "mean_deviation", sc.mean_deviation);
  summary.set_double("summary", "max_deviation", sc.max_deviation);
  summary.set_int("summary", "segments", static_cast<long>(result.segments.size()));
  int reached = 0;
  double time = 0.0;
  for (const SegmentOutcome& seg : result.segments) {
    if (seg.reason == TerminationReason::reached) ++reached;
    time += seg.flight_time;
  }
  summary.set_int("summary", "segments_reached", reached);
  summary.set_double("summary", "flight_time", time);
  summary.set("summary", "final_reason",
              to_string(result.segments.back().reason));
  write_text(out / "summary.ini", write_ini(summary));

  Manifest manifest;
  manifest.command = "fly";
  manifest.seed = a.seed;
  manifest.add("flight_log.csv", a.seed);
  manifest.add("summary.ini", a.seed);
  manifest.write(out);
  std::printf("fly: %zu segments, completion %.2f, total reward %.3f\n",
              result.segments.size(), sc.completion, sc.total_reward);
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  CommonInputs in;
  std::string out, study, trajectory_file, wind_spec = "5@90";
  std::string gains_rl_file, policy_file, policy2_file;
  std::string magnitudes = "0,1,2,3,4,5";
  double magnitude = 5.0;
  double heading = 90.0;
  int seeds = 10;
  int runs = 30;
  std::uint64_t seed = 0;
  bool serial = false;
};

int cmd_eval(const EvalArgs& a) {
  CommonInputs in = a.in;
  in.load();

  Manifest manifest;
  manifest.command = "eval";
  manifest.seed = a.seed;

  if (a.study == "symmetry") {
    if (a.policy_file.empty() || a.policy2_file.empty())
      throw CLI::ValidationError("--policy/--policy2",
                                 "symmetry study needs two checkpoints");
    const PolicyParameters p1 = load_checkpoint_file(a.policy_file);
    const PolicyParameters p2 = load_checkpoint_file(a.policy2_file);
    const fs::path out = prepare_out(a.out);
    const auto h1 = action_angle_histogram(p1, 1000, derive_seed(a.seed, 1));
    const auto h2 = action_angle_histogram(p2, 1000, derive_seed(a.seed, 1));
    std::string csv = "bin_deg,hist_a,hist_b\n";
    for (int b = 0; b < 36; ++b)
      csv += std::to_string(b * 10) + "," + csv_num(h1[b]) + "," + csv_num(h2[b]) + "\n";
    write_text(out / "action_histogram.csv", csv);
    const auto sims = shifted_cosine_similarity(h1, h2);
    std::string sim_csv = "shift_deg,cosine_similarity\n";
    std::vector<double> xs, ys;
    int argmax = 0;
    for (int s = 0; s < 36; ++s) {
      sim_csv += std::to_string(s * 10) + "," + csv_num(sims[s]) + "\n";
      xs.push_back(s * 10);
      ys.push_back(sims[s]);
      if (sims[s] > sims[argmax]) argmax = s;
    }
    write_text(out / "cosine_similarity.csv", sim_csv);
    write_text(out / "cosine_similarity.svg",
               svg_curve(xs, ys, "shift (deg)", "cosine similarity"));
    manifest.add("action_histogram.csv", a.seed);
    manifest.add("cosine_similarity.csv", a.seed);
    manifest.add("cosine_similarity.svg", a.seed);
    manifest.write(out);
    std::printf("eval symmetry: peak similarity %.4f at %d deg shift\n",
                sims[argmax], argmax * 10);
    return 0;
  }

  if (a.study == "density") {
    const WindField wind = wind_from_flag(a.wind_spec);
    PolicyParameters policy;
    const bool with_rl = !a.policy_file.empty();
    if (with_rl) policy = load_checkpoint_file(a.policy_file);
    CascadeGains rl_gains = in.gains;
    if (!a.gains_rl_file.empty())
      rl_gains = gains_from_ini(load_ini_file(a.gains_rl_file));
    const fs::path out = prepare_out(a.out);
    const auto rows =
        density_study(in.gains, rl_gains, with_rl ? &policy : nullptr, wind,
                      in.episode, in.vehicle, a.runs, a.seed, !a.serial);
    std::string csv = "controller,seed,episode_reward\n";
    for (const DensityRow& r : rows)
      csv += r.controller + "," + std::to_string(r.seed) + "," +
             csv_num(r.episode_reward) + "\n";
    write_text(out / "density.csv", csv);
    manifest.add("density.csv", a.seed);
    manifest.write(out);
    std::printf("eval density: %zu rows\n", rows.size());
    return 0;
  }

  if (a.study != "heading" && a.study != "magnitude")
    throw CLI::ValidationError(
        "--study", "expected one of heading, magnitude, density, symmetry");

  if (a.trajectory_file.empty())
    throw CLI::ValidationError("--trajectory", "sweep studies need a trajectory");
  SweepSetup setup;
  const Trajectory base = load_trajectory_file(a.trajectory_file);
  setup.trajectory = decompose(base.waypoints, in.episode.bounding_box);
  setup.trajectory.name = base.name;
  setup.pid_gains = in.gains;
  setup.rl_gains =
      a.gains_rl_file.empty() ? in.gains : gains_from_ini(load_ini_file(a.gains_rl_file));
  PolicyParameters policy;
  if (!a.policy_file.empty()) {
    policy = load_checkpoint_file(a.policy_file);
    setup.policy = &policy;
  }
  setup.config = in.episode;
  setup.vehicle = in.vehicle;
  setup.n_seeds = a.seeds;
  setup.master_seed = a.seed;
  setup.parallel = !a.serial;
  const fs::path out = prepare_out(a.out);

  std::vector<SweepRow> rows;
  if (a.study == "heading") {
    rows = heading_sweep(setup, a.magnitude);
  } else {
    std::vector<double> mags;
    std::istringstream ms(a.magnitudes);
    std::string tok;
    while (std::getline(ms, tok, ',')) mags.push_back(std::stod(tok));
    rows = magnitude_sweep(setup, a.heading, mags);
  }
  write_text(out / (a.study + "_sweep.csv"), sweep_csv(rows));
  manifest.add(a.study + "_sweep.csv", a.seed);

  // Per-condition means, one row per (controller, condition).
  std::string agg = "controller,heading_deg,magnitude,mean_reward,std_reward\n";
  std::map<std::pair<std::string, std::pair<long, long>>, std::vector<double>> groups;
  for (const SweepRow& r : rows)
    groups[{r.controller,
            {std::lround(r.heading_deg * 100), std::lround(r.magnitude * 100)}}]
        .push_back(r.total_reward);
  std::vector<double> xs, ys;
  for (const auto& [key, vals] : groups) {
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
    agg += key.first + "," + csv_num(key.second.first / 100.0) + "," +
           csv_num(key.second.second / 100.0) + "," + csv_num(mean) + "," +
           csv_num(sd) + "\n";
    xs.push_back(a.study == "heading" ? key.second.first / 100.0
                                      : key.second.second / 100.0);
    ys.push_back(mean);
  }
  write_text(out / (a.study + "_summary.csv"), agg);
  write_text(out / (a.study + "_summary.svg"),
             svg_curve(xs, ys, a.study == "heading" ? "heading (deg)" : "wind (N)",
                       "mean reward"));
  manifest.add(a.study + "_summary.csv", a.seed);
  manifest.add(a.study + "_summary.svg", a.seed);
  manifest.write(out);
  std::printf("eval %s: %zu rows\n", a.study.c_str(), rows.size());
  return 0;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
  std::string out, log_file, kind = "flight";
};

int cmd_plot(const PlotArgs& a) {
  const fs::path out = prepare_out(a.out);
  if (a.kind == "flight") {
    const auto rows = read_tick_log(a.log_file);
    if (rows.empty()) throw std::runtime_error("plot: log has no rows");
    write_text(out / "flight.svg", svg_flight(rows));
    std::printf("plot: flight.svg (%zu ticks)\n", rows.size());
  } else if (a.kind == "curve") {
    std::ifstream f(a.log_file);
    if (!f) throw std::runtime_error("plot: cannot open " + a.log_file);
    std::string line;
    std::getline(f, line);  // header
    std::vector<double> xs, ys;
    int lineno = 1;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      double x, y;
      if (std::sscanf(line.c_str(), "%lf,%lf", &x, &y) != 2)
        throw std::runtime_error("plot: parse error at " + a.log_file + ":" +
                                 std::to_string(lineno));
      xs.push_back(x);
      ys.push_back(y);
    }
    if (xs.empty()) throw std::runtime_error("plot: log has no rows");
    write_text(out / "curve.svg", svg_curve(xs, ys, "x", "y"));
    std::printf("plot: curve.svg (%zu points)\n", xs.size());
  } else {
    throw CLI::ValidationError("--kind", "expected flight or curve");
  }
  Manifest manifest;
  manifest.command = "plot";
  manifest.add(a.kind == "flight" ? "flight.svg" : "curve.svg", 0);
  manifest.write(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Octorotor navigation testbed: cascaded PID control with a "
               "supervisory RL layer, tuning and robustness evaluation"};
  app.require_subcommand(1);

  TuneArgs tune_args;
  CLI::App* tune_cmd = app.add_subcommand(
      "tune", "Random hyperparameter search over controller gains");
  tune_cmd->add_option("--out", tune_args.out, "Output directory")->required();
  tune_cmd->add_option("--space", tune_args.space_file, "Search space file")
      ->required();
  tune_cmd->add_option("--mode", tune_args.mode, "pid or rl")
      ->check(CLI::IsMember({"pid", "rl"}));
  tune_cmd->add_option("--wind", tune_args.wind_spec, "Wind spec M@H");
  tune_cmd->add_option("--trials", tune_args.trials, "Number of trials")
      ->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", tune_args.seed, "Master seed");
  tune_cmd->add_option("--eval-episodes", tune_args.eval_episodes,
                       "Evaluation episodes per trial");
  tune_cmd->add_option("--rl-train-episodes", tune_args.rl_train_episodes,
                       "Training episodes per RL trial");
  tune_cmd->add_option("--compare-with", tune_args.compare_with,
                       "Trial log of the other condition for the change table");
  tune_cmd->add_flag("--serial", tune_args.serial, "Disable trial parallelism");
  tune_cmd->add_flag("--fresh", tune_args.fresh, "Ignore an existing trial log");
  tune_args.in.add_flags(tune_cmd);

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the supervisory policy");
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--wind", train_args.wind_spec, "Wind spec M@H");
  train_cmd->add_option("--episodes", train_args.episodes, "Episode budget")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", train_args.seed, "Seed");
  train_cmd->add_flag("--serial", train_args.serial, "Disable rollout parallelism");
  train_args.in.add_flags(train_cmd);

  FlyArgs fly_args;
  CLI::App* fly_cmd = app.add_subcommand("fly", "Fly a waypoint trajectory");
  fly_cmd->add_option("--out", fly_args.out, "Output directory")->required();
  fly_cmd->add_option("--trajectory", fly_args.trajectory_file, "Waypoint file")
      ->required();
  fly_cmd->add_option("--mode", fly_args.mode, "pid or rl")
      ->check(CLI::IsMember({"pid", "rl"}));
  fly_cmd->add_option("--policy", fly_args.policy_file, "Checkpoint for rl mode");
  fly_cmd->add_option("--wind", fly_args.wind_spec, "Wind spec M@H");
  fly_cmd->add_option("--wind-onset-segment", fly_args.wind_onset_segment,
                      "Segment index from which the wind applies");
  fly_cmd->add_option("--seed", fly_args.seed, "Seed for the start perturbation");
  fly_cmd->add_flag("--fixed-start", fly_args.fixed_start,
                    "Spawn exactly on the first waypoint at rest");
  fly_args.in.add_flags(fly_cmd);

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Robustness studies and policy analysis");
  eval_cmd->add_option("--out", eval_args.out, "Output directory")->required();
  eval_cmd
      ->add_option("--study", eval_args.study,
                   "heading, magnitude, density or symmetry")
      ->required()
      ->check(CLI::IsMember({"heading", "magnitude", "density", "symmetry"}));
  eval_cmd->add_option("--trajectory", eval_args.trajectory_file, "Waypoint file");
  eval_cmd->add_option("--wind", eval_args.wind_spec, "Wind spec (density study)");
  eval_cmd->add_option("--magnitude", eval_args.magnitude,
                       "Wind magnitude for the heading sweep");
  eval_cmd->add_option("--heading", eval_args.heading,
                       "Heading for the magnitude sweep");
  eval_cmd->add_option("--magnitudes", eval_args.magnitudes,
                       "Comma list for the magnitude sweep");
  eval_cmd->add_option("--gains-rl", eval_args.gains_rl_file,
                       "Gains used under the supervisor");
  eval_cmd->add_option("--policy", eval_args.policy_file, "Checkpoint");
  eval_cmd->add_option("--policy2", eval_args.policy2_file,
                       "Second checkpoint (symmetry study)");
  eval_cmd->add_option("--seeds", eval_args.seeds, "Seeds per condition");
  eval_cmd->add_option("--runs", eval_args.runs, "Episodes (density study)");
  eval_cmd->add_option("--seed", eval_args.seed, "Master seed");
  eval_cmd->add_flag("--serial", eval_args.serial, "Disable parallelism");
  eval_args.in.add_flags(eval_cmd);

  PlotArgs plot_args;
  CLI::App* plot_cmd = app.add_subcommand("plot", "Render logs as SVG");
  plot_cmd->add_option("--out", plot_args.out, "Output directory")->required();
  plot_cmd->add_option("--log", plot_args.log_file, "Input log file")->required();
  plot_cmd->add_option("--kind", plot_args.kind, "flight or curve")
      ->check(CLI::IsMember({"flight", "curve"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*tune_cmd) return cmd_tune(tune_args);
    if (*train_cmd) return cmd_train(train_args);
    if (*fly_cmd) return cmd_fly(fly_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*plot_cmd) return cmd_plot(plot_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
