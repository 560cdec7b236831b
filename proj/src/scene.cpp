#include "seglabel/scene.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace seglabel {

const CameraView& Scene::view_by_id(int view_id) const {
  for (const auto& v : views)
    if (v.view_id == view_id) return v;
  throw data_error("unknown view id " + std::to_string(view_id));
}

void Scene::validate() const {
  for (const auto& p : points) view_by_id(p.view_id);
  std::vector<char> owner(points.size(), 0);
  for (const auto& s : segments) {
    if (s.point_indices.empty()) throw data_error("segment " + std::to_string(s.id) + " is empty");
    for (int idx : s.point_indices) {
      if (idx < 0 || static_cast<size_t>(idx) >= points.size())
        throw data_error("segment " + std::to_string(s.id) + " references point " +
                         std::to_string(idx) + " out of range");
      if (owner[idx]) throw data_error("point " + std::to_string(idx) + " in multiple segments");
      owner[idx] = 1;
    }
  }
}

namespace {

// Deterministic canonical sign: first component larger than the tolerance
// decides; used when the camera ray gives no orientation signal.
Vec3 lexicographically_positive(const Vec3& n) {
  constexpr double tol = 1e-12;
  if (n.x > tol) return n;
  if (n.x < -tol) return -n;
  if (n.y > tol) return n;
  if (n.y < -tol) return -n;
  if (n.z >= 0.0) return n;
  return -n;
}

}  // namespace

Segment make_segment(int id, std::vector<int> point_indices, const Scene& scene) {
  if (point_indices.empty()) throw data_error("make_segment: empty point set");
  Segment s;
  s.id = id;

  Vec3 c{0, 0, 0};
  std::map<int, int> view_votes;
  for (int idx : point_indices) {
    if (idx < 0 || static_cast<size_t>(idx) >= scene.points.size())
      throw data_error("make_segment: point index out of range");
    c += scene.points[idx].position;
    view_votes[scene.points[idx].view_id]++;
  }
  const double n_pts = static_cast<double>(point_indices.size());
  s.centroid = c / n_pts;

  // Majority view; ties go to the smallest view id (std::map iterates in order).
  int best_view = view_votes.begin()->first, best_count = 0;
  for (const auto& [vid, count] : view_votes)
    if (count > best_count) {
      best_view = vid;
      best_count = count;
    }
  s.view_id = best_view;

  const Vec3 origin = scene.view_by_id(best_view).origin;
  s.capture_ray = s.centroid - origin;
  s.horizontal_ray = horizontal(s.capture_ray);

  Vec3 normal;
  if (point_indices.size() == 1) {
    normal = -normalized(s.capture_ray);
    if (squared_norm(normal) == 0.0) normal = {0.0, 0.0, 1.0};
  } else {
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (int idx : point_indices) {
      const Vec3 d = scene.points[idx].position - s.centroid;
      Eigen::Vector3d v(d.x, d.y, d.z);
      scatter += v * v.transpose();
    }
    scatter /= n_pts;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
    const Eigen::Vector3d ev = es.eigenvectors().col(0);  // smallest eigenvalue
    normal = lexicographically_positive({ev.x(), ev.y(), ev.z()});
    if (squared_norm(normal) == 0.0) normal = {0.0, 0.0, 1.0};
  }
  const double d = dot(s.capture_ray, normal);
  if (d > 0.0) normal = -normal;
  s.unit_normal = normalized(normal);

  s.point_indices = std::move(point_indices);
  return s;
}

int LabelSpace::index_of(const std::string& name) const {
  for (size_t i = 0; i < class_names.size(); ++i)
    if (class_names[i] == name) return static_cast<int>(i);
  return -1;
}

void LabelSpace::validate() const {
  if (class_names.empty()) throw config_error("label space has no classes");
  for (size_t i = 0; i < class_names.size(); ++i)
    for (size_t j = i + 1; j < class_names.size(); ++j)
      if (class_names[i] == class_names[j])
        throw config_error("duplicate class name '" + class_names[i] + "'");
  for (const auto& [object, parts] : objects) {
    if (parts.empty()) throw config_error("object '" + object + "' has no parts");
    for (const auto& part : parts)
      if (index_of(part) < 0)
        throw config_error("object '" + object + "' lists unknown class '" + part + "'");
  }
}

Labeling Labeling::from_classes(const std::vector<int>& classes, int k) {
  Labeling l(static_cast<int>(classes.size()), k);
  for (size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0 || classes[i] >= k) throw data_error("class index out of range");
    l.at(static_cast<int>(i), classes[i]) = 1.0;
  }
  return l;
}

bool Labeling::is_integral() const {
  for (double x : v_)
    if (x != 0.0 && x != 1.0) return false;
  return true;
}

int Labeling::class_of(int i) const {
  int found = -1;
  for (int c = 0; c < k_; ++c) {
    const double x = at(i, c);
    if (x == 1.0) {
      if (found >= 0) return -1;
      found = c;
    } else if (x != 0.0) {
      return -1;
    }
  }
  return found;
}

bool Labeling::row_is_zero(int i) const {
  for (int c = 0; c < k_; ++c)
    if (at(i, c) != 0.0) return false;
  return true;
}

ValidationReport validate_labeling(const Labeling& labeling, const LabelSpace& space) {
  if (labeling.cols() != space.size())
    throw data_error("labeling has " + std::to_string(labeling.cols()) + " columns, label space has " +
                     std::to_string(space.size()) + " classes");
  ValidationReport report;
  for (int i = 0; i < labeling.rows(); ++i) {
    bool row_ok = true;
    double sum = 0.0;
    for (int c = 0; c < labeling.cols(); ++c) {
      const double x = labeling.at(i, c);
      if (x != 0.0 && x != 1.0) row_ok = false;
      sum += x;
    }
    if (space.mode == LabelMode::Exclusive && sum != 1.0) row_ok = false;
    if (!row_ok) {
      report.ok = false;
      report.offending_segments.push_back(i);
    }
  }
  return report;
}

double hamming_loss(const Labeling& truth, const Labeling& predicted, LabelMode mode) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols())
    throw data_error("hamming_loss: shape mismatch");
  if (!truth.is_integral() || !predicted.is_integral())
    throw data_error("hamming_loss: labelings must be integral");
  double loss = 0.0;
  if (mode == LabelMode::Exclusive) {
    for (int i = 0; i < truth.rows(); ++i) {
      bool same = true;
      for (int c = 0; c < truth.cols(); ++c)
        if (truth.at(i, c) != predicted.at(i, c)) {
          same = false;
          break;
        }
      if (!same) loss += 1.0;
    }
  } else {
    for (int i = 0; i < truth.rows(); ++i)
      for (int c = 0; c < truth.cols(); ++c)
        if (truth.at(i, c) != predicted.at(i, c)) loss += 1.0;
  }
  return loss;
}

}  // namespace seglabel
