#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quadtrain/ars.hpp"
#include "quadtrain/config.hpp"
#include "quadtrain/episode.hpp"
#include "quadtrain/errors.hpp"
#include "quadtrain/gait.hpp"
#include "quadtrain/harness.hpp"
#include "quadtrain/kinematics.hpp"
#include "quadtrain/policy.hpp"
#include "quadtrain/sim.hpp"

namespace py = pybind11;
using namespace quadtrain;

namespace {

py::dict action_dict(const ActionVector& a) {
  py::dict d;
  d["clearance"] = a.clearance;
  d["penetration"] = a.penetration;
  std::vector<Vec3> deltas(a.deltas.begin(), a.deltas.end());
  d["deltas"] = deltas;
  return d;
}

ScenarioSettings small_settings(int episodes, std::uint64_t seed, int jobs, long max_steps) {
  ScenarioSettings s;
  s.episodes = episodes;
  s.seed = seed;
  s.jobs = jobs;
  s.criteria.max_steps = max_steps;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadruped gait-policy workbench (C++ core)";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<SimulationDiverged>(m, "SimulationDiverged", PyExc_RuntimeError);

  py::enum_<LegId>(m, "LegId")
      .value("FL", LegId::FL)
      .value("FR", LegId::FR)
      .value("BL", LegId::BL)
      .value("BR", LegId::BR);

  py::class_<LegGeometry>(m, "LegGeometry")
      .def(py::init<>())
      .def_readwrite("body_length", &LegGeometry::body_length)
      .def_readwrite("body_width", &LegGeometry::body_width)
      .def_readwrite("abduction_link", &LegGeometry::abduction_link)
      .def_readwrite("upper_leg", &LegGeometry::upper_leg)
      .def_readwrite("lower_leg", &LegGeometry::lower_leg)
      .def_readwrite("joint_limit", &LegGeometry::joint_limit)
      .def("reach", &LegGeometry::reach);

  py::class_<LegJointAngles>(m, "LegJointAngles")
      .def(py::init<>())
      .def(py::init([](double h, double s, double k) { return LegJointAngles{h, s, k}; }),
           py::arg("hip"), py::arg("shoulder"), py::arg("knee"))
      .def_readwrite("hip", &LegJointAngles::hip)
      .def_readwrite("shoulder", &LegJointAngles::shoulder)
      .def_readwrite("knee", &LegJointAngles::knee);

  m.def("leg_chain_transform",
        [](LegId leg, const LegJointAngles& a, const LegGeometry& g) {
          return Eigen::Matrix4d(leg_chain_transform(leg, a, g).homogeneous());
        },
        py::arg("leg"), py::arg("angles"), py::arg("geometry") = LegGeometry{},
        "4x4 base <- foot-joint transform");
  m.def("foot_position_hip_frame", &foot_position_hip_frame, py::arg("leg"), py::arg("angles"),
        py::arg("geometry") = LegGeometry{});
  m.def("leg_inverse_kinematics",
        [](LegId leg, const Vec3& target, const LegGeometry& g) {
          const IkResult r = leg_inverse_kinematics(leg, target, g);
          return py::make_tuple(r.angles, r.clamped);
        },
        py::arg("leg"), py::arg("target"), py::arg("geometry") = LegGeometry{},
        "returns (LegJointAngles, clamped)");
  m.def("grf_to_base_frame",
        [](LegId leg, const Vec3& f_joint, const LegJointAngles& a, const LegGeometry& g) {
          return grf_to_base_frame(f_joint, leg_chain_transform(leg, a, g));
        },
        py::arg("leg"), py::arg("f_joint"), py::arg("angles"), py::arg("geometry") = LegGeometry{});
  m.def("contact_from_force", &contact_from_force, py::arg("force"), py::arg("threshold"));

  py::class_<GaitParams>(m, "GaitParams")
      .def(py::init<>())
      .def_readwrite("clearance_height", &GaitParams::clearance_height)
      .def_readwrite("penetration_depth", &GaitParams::penetration_depth)
      .def_readwrite("step_length", &GaitParams::step_length)
      .def_readwrite("step_velocity_scale", &GaitParams::step_velocity_scale)
      .def_readwrite("duty_factor", &GaitParams::duty_factor);
  m.def("foot_trajectory", &foot_trajectory, py::arg("s"), py::arg("params") = GaitParams{},
        "foot offset (x, y, z) at gait phase s in [0, 1)");

  m.def("step_reward", &step_reward, py::arg("dx"), py::arg("roll"), py::arg("pitch"),
        py::arg("omega"));

  py::enum_<ObservationVariant>(m, "ObservationVariant")
      .value("IMU", ObservationVariant::Imu)
      .value("IMU_CONTACTS", ObservationVariant::ImuContacts)
      .value("IMU_FORCE", ObservationVariant::ImuForce);
  m.def("variant_from_tag", [](const std::string& t) { return variant_from_tag(t); });
  m.def("variant_tag", [](ObservationVariant v) { return std::string(variant_tag(v)); });
  m.def("observation_dim", &observation_dim);

  py::class_<PolicyMatrix>(m, "PolicyMatrix")
      .def(py::init<ObservationVariant>())
      .def(py::init<ObservationVariant, Eigen::MatrixXd>())
      .def_property_readonly("variant", &PolicyMatrix::variant)
      .def_property_readonly("weights", &PolicyMatrix::weights)
      .def_property_readonly("obs_dim", &PolicyMatrix::obs_dim)
      .def("__eq__", &PolicyMatrix::operator==);
  m.def("save_policy", [](const PolicyMatrix& p, const std::string& path) { save_policy(p, path); });
  m.def("load_policy", [](const std::string& path) { return load_policy(path); });
  m.def("act", [](const PolicyMatrix& p, const Eigen::VectorXd& obs) { return action_dict(act(p, obs)); },
        py::arg("policy"), py::arg("observation"));

  py::class_<World>(m, "World")
      .def(py::init([](double terrain_height, std::uint64_t seed, double incline_deg) {
             WorldSpec spec;
             if (terrain_height > 0.0) spec.terrain = TerrainSpec::rough(terrain_height, 1.0, seed);
             else if (incline_deg != 0.0) spec.terrain = TerrainSpec::incline(incline_deg * M_PI / 180.0);
             return World(spec);
           }),
           py::arg("terrain_height") = 0.0, py::arg("seed") = 0, py::arg("incline_deg") = 0.0)
      .def("step_standing", [](World& w) { w.step(w.standing_pose()); })
      .def_property_readonly("time", &World::time)
      .def_property_readonly("position", [](const World& w) { return w.base().position; })
      .def_property_readonly("roll", [](const World& w) { return w.base().roll(); })
      .def_property_readonly("pitch", [](const World& w) { return w.base().pitch(); })
      .def_property_readonly("contacts", [](const World& w) { return w.sensors().contact; })
      .def_property_readonly("foot_forces_base", [](const World& w) {
        const auto& f = w.sensors().f_base;
        return std::vector<Vec3>(f.begin(), f.end());
      })
      .def("observation", [](const World& w, ObservationVariant v) {
        return build_observation(v, w.sensors(), GaitPhase::trot(), w.params().robot.weight());
      });

  m.def("verify_grf",
        [](double incline_deg, std::uint64_t seed) {
          const GrfReport r = verify_grf(incline_deg * M_PI / 180.0, SimParams{}, seed);
          py::dict d;
          d["feet"] = std::vector<Vec3>(r.feet.begin(), r.feet.end());
          d["total"] = r.total;
          d["resultant"] = r.resultant;
          d["tilt_deg"] = r.tilt_deg;
          d["status"] = std::string(to_string(r.status));
          return d;
        },
        py::arg("incline_deg") = 0.0, py::arg("seed") = 0);

  m.def("train",
        [](const std::string& variant, int epochs, std::uint64_t seed, double terrain_height,
           long episode_steps, int jobs) {
          TrainOptions opt;
          opt.variant = variant_from_tag(variant);
          opt.epochs = epochs;
          opt.ars.seed = seed;
          opt.ars.episode_steps = episode_steps;
          opt.jobs = jobs;
          if (terrain_height > 0.0) opt.env.nominal.terrain = TerrainSpec::rough(terrain_height, 1.0, seed);
          std::optional<TrainOutput> out;
          {
            py::gil_scoped_release release;
            out.emplace(train(opt));
          }
          std::vector<double> curve;
          for (const auto& r : out->curve) curve.push_back(r.mean_reward_per_step);
          return py::make_tuple(out->policy, curve);
        },
        py::arg("variant") = "imu", py::arg("epochs") = 1, py::arg("seed") = 0,
        py::arg("terrain_height") = 0.0, py::arg("episode_steps") = 1000, py::arg("jobs") = 1,
        "returns (PolicyMatrix, per-epoch mean reward per step)");

  m.def("evaluate_survival",
        [](const std::vector<PolicyMatrix>& policies, double terrain_height, int episodes,
           std::uint64_t seed, long max_steps, int jobs) {
          const ScenarioSettings s = small_settings(episodes, seed, jobs, max_steps);
          std::vector<PolicyEntry> entries;
          for (std::size_t i = 0; i < policies.size(); ++i) {
            entries.push_back(make_policy_entry("policy_" + std::to_string(i), policies[i], s.control));
          }
          ScenarioResult r;
          {
            py::gil_scoped_release release;
            r = run_survival(entries, terrain_height, s);
          }
          py::list rows;
          for (const auto& rec : r.records) {
            rows.append(py::make_tuple(rec.policy, rec.group, rec.distance, rec.steps,
                                       std::string(to_string(rec.outcome)), rec.alive()));
          }
          return rows;
        },
        py::arg("policies"), py::arg("terrain_height") = 0.104, py::arg("episodes") = 2,
        py::arg("seed") = 0, py::arg("max_steps") = 1000, py::arg("jobs") = 1,
        "rows of (policy, variant, distance_m, steps, outcome, alive)");
}
