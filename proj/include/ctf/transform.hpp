#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ctf {

enum class TransformKind {
  kIdentity,
  kAffine,
  kExp,
  kLogistic,
  kComposition,
  kPartition,
};

// Open interval describing one coordinate of an image domain.
struct CoordInterval {
  double lower;
  double upper;

  bool contains(double y) const { return y > lower && y < upper; }

  // Pull a value sitting on (or beyond) a boundary one representable step
  // into the interior. Values already inside are returned unchanged.
  double nudge_inside(double y) const;
};

// Immutable invertible map built from elementwise diffeomorphisms.
//
// Shipped kinds act coordinatewise: identity and affine on all of R, exp
// onto (0, inf), the standard logistic onto (0, 1). Compositions apply their
// parts first-to-last on the forward pass; partitions act blockwise with the
// state block first. Copies share the underlying node, so Transform values
// are cheap to pass around and safe to use from any number of threads.
class Transform {
 public:
  static Transform identity(int dim);
  static Transform affine(Eigen::VectorXd scale, Eigen::VectorXd shift);
  static Transform exp(int dim);
  static Transform logistic(int dim);
  static Transform compose(std::vector<Transform> parts);
  static Transform partition(Transform state, Transform obs);

  TransformKind kind() const;
  int dim() const;

  // Maps a latent point into the image domain.
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // Maps an image point back to latent space. Throws DomainError when a
  // coordinate sits on or outside its image interval. Logistic coordinates
  // strictly inside (0, 1) but within 1e-15 of a boundary are clamped before
  // the logit; when `clamped` is non-null it is set accordingly.
  Eigen::VectorXd inverse(const Eigen::VectorXd& y,
                          bool* clamped = nullptr) const;

  // ln |det J_{t^-1}(y)|. For elementwise kinds this is the sum of the
  // per-coordinate log-derivatives; compositions accumulate stage terms at
  // the chained pullback points t_n^-1(y), t_{n-1}^-1(t_n^-1(y)), ...
  double log_det_jacobian_inverse(const Eigen::VectorXd& y) const;

  // Scalar per-coordinate forms of the three maps above. Every shipped kind
  // acts coordinatewise, so these carry the full semantics and let callers
  // evaluate grids without assembling vectors.
  double forward_coord(int i, double x) const;
  double inverse_coord(int i, double y, bool* clamped = nullptr) const;
  double log_inv_deriv_coord(int i, double y) const;

  // Image interval of coordinate i. For compositions this is the interval
  // checked by the outermost stage; inner stages validate their own inputs
  // during inversion.
  CoordInterval domain(int i) const;

  // Partition accessors. Throw unless kind() == kPartition.
  const Transform& state_part() const;
  const Transform& obs_part() const;
  int state_dim() const;
  int obs_dim() const;

  bool operator==(const Transform& other) const;
  bool operator!=(const Transform& other) const { return !(*this == other); }

  // JSON fragment with the kind string and parameter arrays, as embedded in
  // experiment configs.
  std::string to_json() const;
  static Transform from_json(const std::string& fragment);

 private:
  struct Node;
  explicit Transform(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

}  // namespace ctf
