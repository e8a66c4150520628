#include "quadtrain/ars.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "quadtrain/errors.hpp"
#include "quadtrain/util.hpp"

namespace quadtrain {

void ArsConfig::validate() const {
  if (n_rollouts < 2) throw ConfigError("ars: n_rollouts must be >= 2");
  if (!one_sided && n_rollouts % 2 != 0) {
    throw ConfigError("ars: n_rollouts must be even (mirrored pairs)");
  }
  if (top_b < 1 || top_b > directions()) {
    throw ConfigError("ars: top_b must be in [1, " + std::to_string(directions()) + "]");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("ars: learning_rate must be > 0");
  if (!(exploration_noise > 0.0)) throw ConfigError("ars: exploration_noise must be > 0");
  if (episode_steps < 1) throw ConfigError("ars: episode_steps must be >= 1");
  if (checkpoint_every < 1) throw ConfigError("ars: checkpoint_every must be >= 1");
}

std::vector<int> select_top_directions(std::span<const double> r_plus,
                                       std::span<const double> r_minus, int top_b) {
  std::vector<int> order(r_plus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::max(r_plus[a], r_minus[a]) > std::max(r_plus[b], r_minus[b]);
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_b)));
  return order;
}

Eigen::MatrixXd ars_update(std::span<const Eigen::MatrixXd> directions,
                           std::span<const double> r_plus, std::span<const double> r_minus,
                           const ArsConfig& config) {
  if (directions.empty()) throw ContractViolation("ars_update: no directions");
  if (r_plus.size() != directions.size() || r_minus.size() != directions.size()) {
    throw ContractViolation("ars_update: reward/direction count mismatch");
  }
  const auto top = select_top_directions(r_plus, r_minus, config.top_b);
  const double b = static_cast<double>(top.size());

  double mean = 0.0;
  for (int k : top) mean += r_plus[k] + r_minus[k];
  mean /= 2.0 * b;
  double var = 0.0;
  for (int k : top) {
    var += (r_plus[k] - mean) * (r_plus[k] - mean) + (r_minus[k] - mean) * (r_minus[k] - mean);
  }
  const double sigma = std::max(std::sqrt(var / (2.0 * b)), 1e-8);

  Eigen::MatrixXd step = Eigen::MatrixXd::Zero(directions[0].rows(), directions[0].cols());
  for (int k : top) step += (r_plus[k] - r_minus[k]) * directions[k];
  return config.learning_rate / (b * sigma) * step;
}

ArsOptimizer::ArsOptimizer(ArsConfig config, Eigen::MatrixXd initial, RolloutFn rollout, int jobs)
    : config_(config),
      params_(std::move(initial)),
      rollout_(std::move(rollout)),
      jobs_(std::max(1, jobs)),
      rng_(derive_seed(config.seed, 0x61727321ULL)) {
  config_.validate();
}

TrainRecord ArsOptimizer::train_epoch() {
  const int n_dir = config_.directions();
  const double nu = config_.exploration_noise;
  const int epoch = epoch_ + 1;

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::MatrixXd> deltas(n_dir);
  for (auto& d : deltas) {
    d.resize(params_.rows(), params_.cols());
    for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = gauss(rng_);
  }

  // Jobs: mirrored pairs share an environment seed; one-sided runs share one
  // seed across the epoch with the unperturbed rollout last.
  struct Job {
    Eigen::MatrixXd params;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int k = 0; k < n_dir; ++k) {
    if (config_.one_sided) {
      jobs.push_back({params_ + nu * deltas[k], derive_seed(config_.seed, epoch, 0)});
    } else {
      const std::uint64_t seed = derive_seed(config_.seed, epoch, k);
      jobs.push_back({params_ + nu * deltas[k], seed});
      jobs.push_back({params_ - nu * deltas[k], seed});
    }
  }
  if (config_.one_sided) jobs.push_back({params_, derive_seed(config_.seed, epoch, 0)});

  std::vector<RolloutResult> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), jobs_,
               [&](int i) { results[i] = rollout_(jobs[i].params, jobs[i].seed); });

  double worst_finite = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (!r.diverged) worst_finite = std::min(worst_finite, r.return_per_step);
  }
  if (!std::isfinite(worst_finite)) {
    throw TrainingAborted("every rollout of epoch " + std::to_string(epoch) + " diverged");
  }
  std::vector<double> returns(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    returns[i] = results[i].diverged ? worst_finite : results[i].return_per_step;
  }

  std::vector<double> r_plus(n_dir), r_minus(n_dir);
  for (int k = 0; k < n_dir; ++k) {
    if (config_.one_sided) {
      r_plus[k] = returns[k];
      r_minus[k] = returns.back();
    } else {
      r_plus[k] = returns[2 * k];
      r_minus[k] = returns[2 * k + 1];
    }
  }
  params_ += ars_update(deltas, r_plus, r_minus, config_);
  epoch_ = epoch;

  TrainRecord rec;
  rec.epoch = epoch;
  rec.best = *std::max_element(returns.begin(), returns.end());
  rec.worst = *std::min_element(returns.begin(), returns.end());
  rec.mean_reward_per_step =
      std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  double dist = 0.0;
  for (const auto& r : results) dist += r.distance;
  rec.distance_mean = dist / static_cast<double>(results.size());
  return rec;
}

std::string ArsOptimizer::rng_state() const {
  std::ostringstream out;
  out << rng_;
  return out.str();
}

void ArsOptimizer::restore(int epoch, Eigen::MatrixXd params, const std::string& rng_state) {
  if (params.rows() != params_.rows() || params.cols() != params_.cols()) {
    throw ContractViolation("restore: parameter shape mismatch");
  }
  std::istringstream in(rng_state);
  in >> rng_;
  if (!in) throw ParseError("malformed RNG state", 0);
  epoch_ = epoch;
  params_ = std::move(params);
}

RolloutResult quadruped_rollout(const PolicyMatrix& policy, std::uint64_t seed,
                                const TrainingEnvironment& env, long episode_steps,
                                const EpisodeHooks& hooks) {
  RolloutResult out;
  try {
    World world(randomize_episode(env.nominal, seed, env.randomization));
    LinearPolicyController controller(policy, env.control.gait, env.control.bounds);
    TerminationCriteria criteria = env.criteria;
    criteria.goal_distance = std::numeric_limits<double>::infinity();
    criteria.max_steps = episode_steps;
    criteria.stand_height = env.nominal.params.stand_height;
    const EpisodeResult ep =
        run_episode(world, controller, env.control.initial_phase(), criteria, hooks);
    out.return_per_step = ep.return_per_step();
    out.steps = ep.steps;
    out.distance = ep.distance;
  } catch (const SimulationDiverged&) {
    out.diverged = true;
  }
  return out;
}

void write_curve_csv(std::ostream& out, std::span<const TrainRecord> curve) {
  out << "epoch,mean_reward_per_step,best,worst,distance_mean\n";
  for (const auto& r : curve) {
    out << r.epoch << ',' << format_double(r.mean_reward_per_step) << ','
        << format_double(r.best) << ',' << format_double(r.worst) << ','
        << format_double(r.distance_mean) << '\n';
  }
}

namespace {

std::vector<TrainRecord> read_curve_csv(const std::filesystem::path& path, int up_to_epoch) {
  std::vector<TrainRecord> curve;
  std::ifstream in(path);
  if (!in) throw Error("cannot resume: missing " + path.string());
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line) && static_cast<int>(curve.size()) < up_to_epoch) {
    ++line_no;
    std::istringstream row(line);
    TrainRecord r;
    char c1, c2, c3, c4;
    if (!(row >> r.epoch >> c1 >> r.mean_reward_per_step >> c2 >> r.best >> c3 >> r.worst >> c4 >>
          r.distance_mean)) {
      throw ParseError("malformed curve row", line_no, path.string());
    }
    curve.push_back(r);
  }
  if (static_cast<int>(curve.size()) != up_to_epoch) {
    throw Error("cannot resume: " + path.string() + " has fewer rows than the checkpoint epoch");
  }
  return curve;
}

void write_checkpoint(const std::filesystem::path& dir, const ArsOptimizer& opt,
                      ObservationVariant variant) {
  save_policy(PolicyMatrix(variant, opt.params()), dir / "checkpoint.policy");
  std::ofstream state(dir / "checkpoint.state");
  state << "epoch=" << opt.epoch() << '\n'
        << "variant=" << variant_tag(variant) << '\n'
        << "seed=" << opt.config().seed << '\n'
        << "rng=" << opt.rng_state() << '\n';
  if (!state) throw Error("failed writing checkpoint in " + dir.string());
}

}  // namespace

TrainOutput train(const TrainOptions& options) {
  options.ars.validate();
  const ObservationVariant variant = options.variant;
  const TrainingEnvironment env = options.env;
  const long steps = options.ars.episode_steps;
  RolloutFn rollout = [variant, env, steps](const Eigen::MatrixXd& params, std::uint64_t seed) {
    return quadruped_rollout(PolicyMatrix(variant, params), seed, env, steps);
  };

  ArsOptimizer opt(options.ars, PolicyMatrix(variant).weights(), rollout, options.jobs);
  std::vector<TrainRecord> curve;
  const auto& dir = options.out_dir;
  if (!dir.empty()) std::filesystem::create_directories(dir);

  if (options.resume && !dir.empty() && std::filesystem::exists(dir / "checkpoint.state")) {
    std::ifstream state(dir / "checkpoint.state");
    std::string line;
    int epoch = -1;
    std::string rng, tag;
    while (std::getline(state, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key == "epoch") epoch = std::stoi(value);
      if (key == "rng") rng = value;
      if (key == "variant") tag = value;
    }
    if (epoch < 0 || rng.empty()) throw Error("cannot resume: malformed checkpoint.state");
    if (variant_from_tag(tag) != variant) throw ConfigError("cannot resume: checkpoint variant is " + tag);
    const PolicyMatrix ckpt = load_policy(dir / "checkpoint.policy");
    opt.restore(epoch, ckpt.weights(), rng);
    curve = read_curve_csv(dir / "curve.csv", epoch);
  }

  auto flush_curve = [&] {
    if (dir.empty()) return;
    std::ofstream out(dir / "curve.csv");
    write_curve_csv(out, curve);
  };

  while (opt.epoch() < options.epochs) {
    TrainRecord rec = opt.train_epoch();
    const bool checkpoint =
        rec.epoch % options.ars.checkpoint_every == 0 || rec.epoch == options.epochs;
    curve.push_back(rec);
    if (!dir.empty() && checkpoint) {
      flush_curve();
      write_checkpoint(dir, opt, variant);
      curve.back().checkpoint = (dir / "checkpoint.policy").string();
    }
  }

  PolicyMatrix policy(variant, opt.params());
  if (!dir.empty()) {
    flush_curve();
    save_policy(policy, dir / "policy.txt");
  }
  return {std::move(policy), std::move(curve)};
}

}  // namespace quadtrain
