#include "ctf/transform.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

#include "ctf/error.hpp"

namespace ctf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogisticClamp = 1e-15;

void check_dim(int expected, Eigen::Index got, const char* what) {
  if (got != expected) {
    throw DimensionError(std::string(what) + ": expected dimension " +
                         std::to_string(expected) + ", got " +
                         std::to_string(got));
  }
}

}  // namespace

double CoordInterval::nudge_inside(double y) const {
  if (y <= lower) return std::nextafter(lower, kInf);
  if (y >= upper) return std::nextafter(upper, -kInf);
  return y;
}

struct Transform::Node {
  TransformKind kind;
  int dim = 0;
  Eigen::VectorXd scale;  // affine
  Eigen::VectorXd shift;  // affine
  std::vector<Transform> parts;  // composition: stages; partition: {state, obs}
};

Transform::Transform(std::shared_ptr<const Node> node)
    : node_(std::move(node)) {}

Transform Transform::identity(int dim) {
  if (dim <= 0) throw DimensionError("identity: dimension must be positive");
  auto n = std::make_shared<Node>();
  n->kind = TransformKind::kIdentity;
  n->dim = dim;
  return Transform(std::move(n));
}

Transform Transform::affine(Eigen::VectorXd scale, Eigen::VectorXd shift) {
  if (scale.size() == 0 || scale.size() != shift.size()) {
    throw DimensionError("affine: scale and shift must be nonempty and match");
  }
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (scale(i) == 0.0 || !std::isfinite(scale(i)) ||
        !std::isfinite(shift(i))) {
      throw DomainError("affine: scale entries must be finite and nonzero");
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = TransformKind::kAffine;
  n->dim = static_cast<int>(scale.size());
  n->scale = std::move(scale);
  n->shift = std::move(shift);
  return Transform(std::move(n));
}

Transform Transform::exp(int dim) {
  if (dim <= 0) throw DimensionError("exp: dimension must be positive");
  auto n = std::make_shared<Node>();
  n->kind = TransformKind::kExp;
  n->dim = dim;
  return Transform(std::move(n));
}

Transform Transform::logistic(int dim) {
  if (dim <= 0) throw DimensionError("logistic: dimension must be positive");
  auto n = std::make_shared<Node>();
  n->kind = TransformKind::kLogistic;
  n->dim = dim;
  return Transform(std::move(n));
}

Transform Transform::compose(std::vector<Transform> parts) {
  if (parts.empty()) throw DimensionError("compose: empty part list");
  const int dim = parts.front().dim();
  for (const Transform& t : parts) {
    if (t.dim() != dim) {
      throw DimensionError("compose: all parts must share a dimension");
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = TransformKind::kComposition;
  n->dim = dim;
  n->parts = std::move(parts);
  return Transform(std::move(n));
}

Transform Transform::partition(Transform state, Transform obs) {
  auto n = std::make_shared<Node>();
  n->kind = TransformKind::kPartition;
  n->dim = state.dim() + obs.dim();
  n->parts = {std::move(state), std::move(obs)};
  return Transform(std::move(n));
}

TransformKind Transform::kind() const { return node_->kind; }

int Transform::dim() const { return node_->dim; }

const Transform& Transform::state_part() const {
  if (node_->kind != TransformKind::kPartition) {
    throw Error("state_part: transform is not a partition");
  }
  return node_->parts[0];
}

const Transform& Transform::obs_part() const {
  if (node_->kind != TransformKind::kPartition) {
    throw Error("obs_part: transform is not a partition");
  }
  return node_->parts[1];
}

int Transform::state_dim() const { return state_part().dim(); }

int Transform::obs_dim() const { return obs_part().dim(); }

double Transform::forward_coord(int i, double x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case TransformKind::kIdentity:
      return x;
    case TransformKind::kAffine:
      return n.scale(i) * x + n.shift(i);
    case TransformKind::kExp:
      return std::exp(x);
    case TransformKind::kLogistic:
      return 1.0 / (1.0 + std::exp(-x));
    case TransformKind::kComposition: {
      double v = x;
      for (const Transform& t : n.parts) v = t.forward_coord(i, v);
      return v;
    }
    case TransformKind::kPartition: {
      const int split = n.parts[0].dim();
      return (i < split) ? n.parts[0].forward_coord(i, x)
                         : n.parts[1].forward_coord(i - split, x);
    }
  }
  throw Error("forward_coord: unreachable");
}

double Transform::inverse_coord(int i, double y, bool* clamped) const {
  const Node& n = *node_;
  switch (n.kind) {
    case TransformKind::kIdentity:
      return y;
    case TransformKind::kAffine:
      return (y - n.shift(i)) / n.scale(i);
    case TransformKind::kExp:
      if (!(y > 0.0) || !(y < kInf)) {
        throw DomainError("exp inverse: value outside (0, inf)");
      }
      return std::log(y);
    case TransformKind::kLogistic: {
      if (!(y > 0.0) || !(y < 1.0)) {
        throw DomainError("logistic inverse: value outside (0, 1)");
      }
      double v = y;
      if (v < kLogisticClamp) {
        v = kLogisticClamp;
        if (clamped) *clamped = true;
      } else if (v > 1.0 - kLogisticClamp) {
        v = 1.0 - kLogisticClamp;
        if (clamped) *clamped = true;
      }
      return std::log(v / (1.0 - v));
    }
    case TransformKind::kComposition: {
      double v = y;
      for (auto it = n.parts.rbegin(); it != n.parts.rend(); ++it) {
        v = it->inverse_coord(i, v, clamped);
      }
      return v;
    }
    case TransformKind::kPartition: {
      const int split = n.parts[0].dim();
      return (i < split) ? n.parts[0].inverse_coord(i, y, clamped)
                         : n.parts[1].inverse_coord(i - split, y, clamped);
    }
  }
  throw Error("inverse_coord: unreachable");
}

double Transform::log_inv_deriv_coord(int i, double y) const {
  const Node& n = *node_;
  switch (n.kind) {
    case TransformKind::kIdentity:
      return 0.0;
    case TransformKind::kAffine:
      return -std::log(std::abs(n.scale(i)));
    case TransformKind::kExp:
      if (!(y > 0.0) || !(y < kInf)) {
        throw DomainError("exp inverse: value outside (0, inf)");
      }
      // d/dy ln y = 1/y
      return -std::log(y);
    case TransformKind::kLogistic: {
      if (!(y > 0.0) || !(y < 1.0)) {
        throw DomainError("logistic inverse: value outside (0, 1)");
      }
      const double v =
          std::min(std::max(y, kLogisticClamp), 1.0 - kLogisticClamp);
      // d/dy logit(y) = 1 / (y (1 - y))
      return -std::log(v) - std::log1p(-v);
    }
    case TransformKind::kComposition: {
      // Stage terms evaluated at the chained pullback points.
      double acc = 0.0;
      double v = y;
      for (auto it = n.parts.rbegin(); it != n.parts.rend(); ++it) {
        acc += it->log_inv_deriv_coord(i, v);
        v = it->inverse_coord(i, v);
      }
      return acc;
    }
    case TransformKind::kPartition: {
      const int split = n.parts[0].dim();
      return (i < split) ? n.parts[0].log_inv_deriv_coord(i, y)
                         : n.parts[1].log_inv_deriv_coord(i - split, y);
    }
  }
  throw Error("log_inv_deriv_coord: unreachable");
}

Eigen::VectorXd Transform::forward(const Eigen::VectorXd& x) const {
  check_dim(dim(), x.size(), "forward");
  Eigen::VectorXd y(x.size());
  for (int i = 0; i < dim(); ++i) y(i) = forward_coord(i, x(i));
  return y;
}

Eigen::VectorXd Transform::inverse(const Eigen::VectorXd& y,
                                   bool* clamped) const {
  check_dim(dim(), y.size(), "inverse");
  Eigen::VectorXd x(y.size());
  for (int i = 0; i < dim(); ++i) x(i) = inverse_coord(i, y(i), clamped);
  return x;
}

double Transform::log_det_jacobian_inverse(const Eigen::VectorXd& y) const {
  check_dim(dim(), y.size(), "log_det_jacobian_inverse");
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) acc += log_inv_deriv_coord(i, y(i));
  return acc;
}

CoordInterval Transform::domain(int i) const {
  const Node& n = *node_;
  switch (n.kind) {
    case TransformKind::kIdentity:
    case TransformKind::kAffine:
      return {-kInf, kInf};
    case TransformKind::kExp:
      return {0.0, kInf};
    case TransformKind::kLogistic:
      return {0.0, 1.0};
    case TransformKind::kComposition:
      return n.parts.back().domain(i);
    case TransformKind::kPartition: {
      const int split = n.parts[0].dim();
      return (i < split) ? n.parts[0].domain(i)
                         : n.parts[1].domain(i - split);
    }
  }
  throw Error("domain: unreachable");
}

bool Transform::operator==(const Transform& other) const {
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind || a.dim != b.dim) return false;
  switch (a.kind) {
    case TransformKind::kAffine:
      return a.scale == b.scale && a.shift == b.shift;
    case TransformKind::kComposition:
    case TransformKind::kPartition: {
      if (a.parts.size() != b.parts.size()) return false;
      for (std::size_t i = 0; i < a.parts.size(); ++i) {
        if (a.parts[i] != b.parts[i]) return false;
      }
      return true;
    }
    default:
      return true;
  }
}

namespace {

Transform transform_from_json_impl(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("transform: expected an object with a \"kind\" string");
  }
  const std::string kind = j["kind"].get<std::string>();
  auto require_dim = [&]() -> int {
    if (!j.contains("dim") || !j["dim"].is_number_integer()) {
      throw ConfigError("transform: missing integer \"dim\" for kind " + kind);
    }
    return j["dim"].get<int>();
  };
  if (kind == "identity") return Transform::identity(require_dim());
  if (kind == "exp") return Transform::exp(require_dim());
  if (kind == "logistic") return Transform::logistic(require_dim());
  if (kind == "affine") {
    if (!j.contains("scale") || !j.contains("shift")) {
      throw ConfigError("transform: affine requires \"scale\" and \"shift\"");
    }
    const auto scale = j["scale"].get<std::vector<double>>();
    const auto shift = j["shift"].get<std::vector<double>>();
    return Transform::affine(
        Eigen::Map<const Eigen::VectorXd>(scale.data(), scale.size()),
        Eigen::Map<const Eigen::VectorXd>(shift.data(), shift.size()));
  }
  if (kind == "composition") {
    if (!j.contains("parts") || !j["parts"].is_array()) {
      throw ConfigError("transform: composition requires a \"parts\" array");
    }
    std::vector<Transform> parts;
    for (const auto& p : j["parts"]) parts.push_back(transform_from_json_impl(p));
    return Transform::compose(std::move(parts));
  }
  if (kind == "partition") {
    if (!j.contains("state") || !j.contains("obs")) {
      throw ConfigError("transform: partition requires \"state\" and \"obs\"");
    }
    return Transform::partition(transform_from_json_impl(j["state"]),
                                transform_from_json_impl(j["obs"]));
  }
  throw ConfigError("transform: unknown kind \"" + kind + "\"");
}

}  // namespace

std::string Transform::to_json() const {
  const Node& n = *node_;
  nlohmann::json j;
  switch (n.kind) {
    case TransformKind::kIdentity:
      j["kind"] = "identity";
      j["dim"] = n.dim;
      break;
    case TransformKind::kAffine:
      j["kind"] = "affine";
      j["scale"] = std::vector<double>(n.scale.data(), n.scale.data() + n.dim);
      j["shift"] = std::vector<double>(n.shift.data(), n.shift.data() + n.dim);
      break;
    case TransformKind::kExp:
      j["kind"] = "exp";
      j["dim"] = n.dim;
      break;
    case TransformKind::kLogistic:
      j["kind"] = "logistic";
      j["dim"] = n.dim;
      break;
    case TransformKind::kComposition: {
      j["kind"] = "composition";
      nlohmann::json arr = nlohmann::json::array();
      for (const Transform& p : n.parts) {
        arr.push_back(nlohmann::json::parse(p.to_json()));
      }
      j["parts"] = arr;
      break;
    }
    case TransformKind::kPartition:
      j["kind"] = "partition";
      j["state"] = nlohmann::json::parse(n.parts[0].to_json());
      j["obs"] = nlohmann::json::parse(n.parts[1].to_json());
      break;
  }
  return j.dump();
}

Transform Transform::from_json(const std::string& fragment) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(fragment);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("transform: invalid JSON: ") + e.what());
  }
  return transform_from_json_impl(j);
}

}  // namespace ctf
