#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "quadtrain/episode.hpp"
#include "quadtrain/policy.hpp"
#include "quadtrain/sim.hpp"

namespace quadtrain {

struct ArsConfig {
  int n_rollouts = 16;
  double learning_rate = 0.03;
  double exploration_noise = 0.05;
  long episode_steps = 5000;
  int top_b = 8;
  // One-sided sampling: n_rollouts directions scored against a single
  // unperturbed rollout instead of mirrored pairs.
  bool one_sided = false;
  std::uint64_t seed = 0;
  int checkpoint_every = 10;

  int directions() const { return one_sided ? n_rollouts : n_rollouts / 2; }
  void validate() const;
};

struct RolloutResult {
  double return_per_step = 0.0;
  long steps = 0;
  double distance = 0.0;
  bool diverged = false;
};

// Evaluates a parameter matrix in an environment identified by `seed`.
using RolloutFn = std::function<RolloutResult(const Eigen::MatrixXd& params, std::uint64_t seed)>;

// Indices of the `top_b` directions ranked by max(r+, r-), best first; ties
// keep the lower index.
std::vector<int> select_top_directions(std::span<const double> r_plus,
                                       std::span<const double> r_minus, int top_b);

// alpha / (b * sigma_R) * sum_k (r+_k - r-_k) delta_k over the top_b
// directions; sigma_R is the standard deviation of the 2b rewards used,
// floored at 1e-8.
Eigen::MatrixXd ars_update(std::span<const Eigen::MatrixXd> directions,
                           std::span<const double> r_plus, std::span<const double> r_minus,
                           const ArsConfig& config);

struct TrainRecord {
  int epoch = 0;
  double mean_reward_per_step = 0.0;
  double best = 0.0;
  double worst = 0.0;
  double distance_mean = 0.0;
  std::string checkpoint;
};

class ArsOptimizer {
 public:
  ArsOptimizer(ArsConfig config, Eigen::MatrixXd initial, RolloutFn rollout, int jobs = 1);

  // Samples directions, evaluates the perturbed parameters and applies one
  // update. Diverged rollouts score the epoch's worst finite return; throws
  // TrainingAborted when every rollout diverged.
  TrainRecord train_epoch();

  const Eigen::MatrixXd& params() const { return params_; }
  int epoch() const { return epoch_; }
  const ArsConfig& config() const { return config_; }

  std::string rng_state() const;
  void restore(int epoch, Eigen::MatrixXd params, const std::string& rng_state);

 private:
  ArsConfig config_;
  Eigen::MatrixXd params_;
  RolloutFn rollout_;
  int jobs_;
  int epoch_ = 0;
  std::mt19937_64 rng_;
};

// Everything a quadruped training rollout needs besides the policy.
struct TrainingEnvironment {
  WorldSpec nominal;
  RandomizationRanges randomization;
  ControlSettings control;
  TerminationCriteria criteria;  // goal/max_steps overridden for training
};

// Fresh randomized world for `seed`, one episode of at most
// config.episode_steps steps, return normalised by the steps survived.
RolloutResult quadruped_rollout(const PolicyMatrix& policy, std::uint64_t seed,
                                const TrainingEnvironment& env, long episode_steps,
                                const EpisodeHooks& hooks = {});

struct TrainOptions {
  ObservationVariant variant = ObservationVariant::Imu;
  ArsConfig ars;
  TrainingEnvironment env;
  int epochs = 0;
  std::filesystem::path out_dir;  // empty: keep everything in memory
  int jobs = 1;
  bool resume = false;
};

struct TrainOutput {
  PolicyMatrix policy;
  std::vector<TrainRecord> curve;
};

// Trains from the zero policy (or the last checkpoint when resuming). With an
// output directory writes policy.txt, curve.csv, checkpoint.policy and
// checkpoint.state.
TrainOutput train(const TrainOptions& options);

void write_curve_csv(std::ostream& out, std::span<const TrainRecord> curve);

}  // namespace quadtrain
