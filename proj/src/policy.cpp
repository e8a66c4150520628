#include "quadtrain/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quadtrain/errors.hpp"

namespace quadtrain {

std::string_view variant_tag(ObservationVariant v) {
  switch (v) {
    case ObservationVariant::Imu: return "imu";
    case ObservationVariant::ImuContacts: return "imu_contacts";
    case ObservationVariant::ImuForce: return "imu_force";
  }
  return "?";
}

ObservationVariant variant_from_tag(std::string_view tag) {
  for (auto v : kAllVariants) {
    if (variant_tag(v) == tag) return v;
  }
  throw ConfigError("unknown observation variant '" + std::string(tag) +
                    "' (valid: imu, imu_contacts, imu_force)");
}

int observation_dim(ObservationVariant v) {
  switch (v) {
    case ObservationVariant::Imu: return 12;
    case ObservationVariant::ImuContacts: return 16;
    case ObservationVariant::ImuForce: return 24;
  }
  return 0;
}

ActionVector clip_action(const ActionVector& a, const ActionBounds& b) {
  ActionVector out;
  out.clearance = std::clamp(a.clearance, 0.0, b.clearance_max);
  out.penetration = std::clamp(a.penetration, 0.0, b.penetration_max);
  for (int i = 0; i < 4; ++i) {
    out.deltas[i] = a.deltas[i].cwiseMax(-b.delta_max).cwiseMin(b.delta_max);
  }
  return out;
}

PolicyMatrix::PolicyMatrix(ObservationVariant variant)
    : variant_(variant), weights_(Eigen::MatrixXd::Zero(observation_dim(variant), kActionDim)) {}

PolicyMatrix::PolicyMatrix(ObservationVariant variant, Eigen::MatrixXd weights)
    : variant_(variant), weights_(std::move(weights)) {
  if (weights_.rows() != observation_dim(variant) || weights_.cols() != kActionDim) {
    throw ContractViolation("policy matrix is " + std::to_string(weights_.rows()) + "x" +
                            std::to_string(weights_.cols()) + ", variant " +
                            std::string(variant_tag(variant)) + " needs " +
                            std::to_string(observation_dim(variant)) + "x14");
  }
  if (!weights_.allFinite()) throw ContractViolation("policy matrix has non-finite entries");
}

Eigen::VectorXd raw_action(const PolicyMatrix& policy, const Eigen::VectorXd& obs) {
  if (obs.size() != policy.obs_dim()) {
    throw ContractViolation("observation has " + std::to_string(obs.size()) +
                            " entries, policy expects " + std::to_string(policy.obs_dim()));
  }
  return policy.weights().transpose() * obs;
}

ActionVector squash_action(const Eigen::VectorXd& raw, const ActionBounds& b) {
  if (raw.size() != kActionDim) throw ContractViolation("raw action must have 14 entries");
  using namespace action_index;
  ActionVector a;
  a.clearance = 0.5 * b.clearance_max * (1.0 + std::tanh(raw[kClearance]));
  a.penetration = 0.5 * b.penetration_max * (1.0 + std::tanh(raw[kPenetration]));
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 3; ++k) a.deltas[i][k] = b.delta_max * std::tanh(raw[kDeltas + 3 * i + k]);
  }
  return clip_action(a, b);
}

ActionVector act(const PolicyMatrix& policy, const Eigen::VectorXd& obs,
                 const ActionBounds& bounds) {
  return squash_action(raw_action(policy, obs), bounds);
}

void write_policy(std::ostream& out, const PolicyMatrix& policy) {
  const auto& w = policy.weights();
  out << w.rows() << ' ' << w.cols() << ' ' << variant_tag(policy.variant()) << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), w(r, c));
      if (c) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

}  // namespace

PolicyMatrix read_policy(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header 'obs_dim act_dim variant'", 1);
  const auto header = split_ws(line);
  int rows = 0, cols = 0;
  if (header.size() != 3 || !parse_number(header[0], rows) || !parse_number(header[1], cols)) {
    throw ParseError("malformed header, expected 'obs_dim act_dim variant'", 1);
  }
  ObservationVariant variant;
  try {
    variant = variant_from_tag(header[2]);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), 1);
  }
  if (cols != kActionDim) {
    throw ParseError("act_dim must be 14, got " + std::to_string(cols), 1);
  }
  if (rows != observation_dim(variant)) {
    throw ParseError("variant " + std::string(variant_tag(variant)) + " needs obs_dim " +
                         std::to_string(observation_dim(variant)) + ", header says " +
                         std::to_string(rows),
                     1);
  }
  Eigen::MatrixXd w(rows, cols);
  std::size_t line_no = 1;
  for (int r = 0; r < rows; ++r) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw ParseError("expected " + std::to_string(rows) + " weight rows, found " +
                           std::to_string(r),
                       line_no);
    }
    const auto tokens = split_ws(line);
    if (static_cast<int>(tokens.size()) != cols) {
      throw ParseError("expected 14 values, found " + std::to_string(tokens.size()), line_no);
    }
    for (int c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_number(tokens[c], v)) {
        throw ParseError("not a number: '" + std::string(tokens[c]) + "'", line_no);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite weight", line_no);
      w(r, c) = v;
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_ws(line).empty()) {
      throw ParseError("unexpected extra row (header declares " + std::to_string(rows) + ")",
                       line_no);
    }
  }
  return PolicyMatrix(variant, std::move(w));
}

void save_policy(const PolicyMatrix& policy, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write policy file " + path.string());
  write_policy(out, policy);
  if (!out) throw Error("failed writing policy file " + path.string());
}

PolicyMatrix load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open policy file " + path.string());
  try {
    return read_policy(in);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path.string());
  }
}

}  // namespace quadtrain
