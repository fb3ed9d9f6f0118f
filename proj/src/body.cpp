#include "pd/body.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pd/serialize.hpp"

namespace pd {

namespace {

struct Affine {
  Mat3 rot = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rot * p + t; }
  Affine then(const Affine& inner) const {
    // this ∘ inner
    return {rot * inner.rot, rot * inner.t + t};
  }
};

std::vector<Affine> global_transforms(const Skeleton& skel, const Pose& pose) {
  std::vector<Affine> out(skel.joints.size());
  for (size_t j = 0; j < skel.joints.size(); ++j) {
    const Joint& joint = skel.joints[j];
    Affine local{pose.rotations[j].toRotationMatrix(), joint.offset};
    if (joint.parent < 0) {
      local.t += pose.root_translation;
      out[j] = local;
    } else {
      out[j] = out[joint.parent].then(local);
    }
  }
  return out;
}

}  // namespace

std::vector<Vec3> Skeleton::rest_positions() const {
  const auto identity = Pose::identity(static_cast<int>(joints.size()));
  const auto transforms = global_transforms(*this, identity);
  std::vector<Vec3> out;
  out.reserve(transforms.size());
  for (const Affine& g : transforms) out.push_back(g.t);
  return out;
}

void Skeleton::validate() const {
  if (joints.empty()) throw InvalidValue("Skeleton: no joints");
  if (joints[0].parent != -1) {
    throw InvalidValue("Skeleton: joint 0 must be the root");
  }
  for (size_t j = 1; j < joints.size(); ++j) {
    // Parent-before-child ordering makes the tree property structural.
    if (joints[j].parent < 0 || joints[j].parent >= static_cast<int>(j)) {
      throw InvalidValue("Skeleton: joint " + std::to_string(j) +
                         " has invalid parent");
    }
  }
}

int ArticulatedBody::part_count() const {
  int max_part = -1;
  for (int p : part_id) max_part = std::max(max_part, p);
  return max_part + 1;
}

void ArticulatedBody::validate() const {
  const int n = static_cast<int>(vertices.size());
  if (part_id.size() != vertices.size() || uv.size() != vertices.size() ||
      skin_weights.size() != vertices.size()) {
    throw ShapeMismatch("ArticulatedBody: per-vertex attribute size mismatch");
  }
  for (const auto& face : faces) {
    for (int idx : face) {
      if (idx < 0 || idx >= n) {
        throw InvalidValue("ArticulatedBody: face indexes invalid vertex");
      }
    }
  }
  skeleton.validate();
  const int k = static_cast<int>(skeleton.joints.size());
  if (part_count() > kNumParts) {
    throw InvalidValue("ArticulatedBody: more than 24 parts");
  }
  for (size_t v = 0; v < vertices.size(); ++v) {
    if (part_id[v] < 0 || part_id[v] >= kNumParts) {
      throw InvalidValue("ArticulatedBody: part id out of range");
    }
    if (uv[v].x() < 0.0 || uv[v].x() > 1.0 || uv[v].y() < 0.0 ||
        uv[v].y() > 1.0) {
      throw InvalidValue("ArticulatedBody: uv outside unit square");
    }
    double sum = 0.0;
    for (const SkinWeight& w : skin_weights[v]) {
      if (w.joint < 0 || w.joint >= k || w.weight < 0.0) {
        throw InvalidValue("ArticulatedBody: bad skin weight");
      }
      sum += w.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidValue("ArticulatedBody: skin weights must sum to 1");
    }
  }
}

void JointRegressor::validate() const {
  if (static_cast<int>(rows.size()) != num_joints) {
    throw ShapeMismatch("JointRegressor: row count mismatch");
  }
  for (const auto& row : rows) {
    double sum = 0.0;
    for (const auto& [v, w] : row) {
      if (v < 0 || v >= num_vertices) {
        throw InvalidValue("JointRegressor: vertex index out of range");
      }
      if (w < 0.0) throw InvalidValue("JointRegressor: negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidValue("JointRegressor: row must sum to 1");
    }
  }
}

Pose Pose::identity(int num_joints) {
  Pose pose;
  pose.rotations.assign(num_joints, Eigen::Quaterniond::Identity());
  return pose;
}

void Pose::validate() const {
  for (const auto& q : rotations) {
    if (std::abs(q.norm() - 1.0) > 1e-9) {
      throw InvalidValue("Pose: quaternion must be unit");
    }
  }
  if (!root_translation.allFinite()) {
    throw InvalidValue("Pose: non-finite root translation");
  }
}

namespace {

struct SegmentSpec {
  int part;        // also the index of the far joint for limb segments
  int bind_joint;  // joint the segment's vertices are rigidly bound to
  Vec3 a, b;       // axis endpoints, rest pose
  double radius;
};

// Appends a capsule (cylinder with cone caps) along a->b. Returns the
// indices of the ring centered at b, used for the joint regressor.
std::vector<int> append_capsule(const SegmentSpec& seg,
                                const BodyConfig& config,
                                const Vec2& uv_min, const Vec2& uv_max,
                                ArticulatedBody* body,
                                std::vector<int>* ring_at_a) {
  const int rings = config.axial_segments + 1;
  const int radial = config.radial_segments;
  const Vec3 axis = seg.b - seg.a;
  Vec3 dir = axis.normalized();
  // Orthonormal frame perpendicular to the axis.
  Vec3 u = dir.cross(std::abs(dir.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX())
               .normalized();
  Vec3 w = dir.cross(u);

  const auto add_vertex = [&](const Vec3& p, double pu, double pv) {
    body->vertices.push_back(p);
    body->part_id.push_back(seg.part);
    body->uv.push_back({uv_min.x() + pu * (uv_max.x() - uv_min.x()),
                        uv_min.y() + pv * (uv_max.y() - uv_min.y())});
    body->skin_weights.push_back({{seg.bind_joint, 1.0}});
    return static_cast<int>(body->vertices.size()) - 1;
  };

  const int pole_a = add_vertex(seg.a - dir * seg.radius, 0.5, 0.0);
  std::vector<std::vector<int>> ring_idx(rings);
  for (int r = 0; r < rings; ++r) {
    const double alpha = static_cast<double>(r) / (rings - 1);
    const Vec3 center = seg.a + axis * alpha;
    const double pv = (r + 1.0) / (rings + 1.0);
    for (int i = 0; i < radial; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / radial;
      const Vec3 p =
          center + seg.radius * (std::cos(angle) * u + std::sin(angle) * w);
      ring_idx[r].push_back(
          add_vertex(p, static_cast<double>(i) / radial, pv));
    }
  }
  const int pole_b = add_vertex(seg.b + dir * seg.radius, 0.5, 1.0);

  for (int i = 0; i < radial; ++i) {
    const int j = (i + 1) % radial;
    body->faces.push_back({pole_a, ring_idx[0][j], ring_idx[0][i]});
    body->faces.push_back({pole_b, ring_idx[rings - 1][i],
                           ring_idx[rings - 1][j]});
  }
  for (int r = 0; r + 1 < rings; ++r) {
    for (int i = 0; i < radial; ++i) {
      const int j = (i + 1) % radial;
      const int a0 = ring_idx[r][i], a1 = ring_idx[r][j];
      const int b0 = ring_idx[r + 1][i], b1 = ring_idx[r + 1][j];
      body->faces.push_back({a0, a1, b1});
      body->faces.push_back({a0, b1, b0});
    }
  }

  if (ring_at_a) *ring_at_a = ring_idx[0];
  return ring_idx[rings - 1];
}

Skeleton default_skeleton(double scale) {
  // SMPL-like 24-joint tree: pelvis root, two legs, a three-segment spine,
  // neck/head, collars, and two arms in T-pose. y up, z toward the viewer.
  struct J {
    const char* name;
    int parent;
    double x, y, z;
  };
  static constexpr J kJoints[kNumJoints] = {
      {"pelvis", -1, 0.0, 0.0, 0.0},
      {"hip_l", 0, 0.09, -0.06, 0.0},
      {"hip_r", 0, -0.09, -0.06, 0.0},
      {"spine1", 0, 0.0, 0.11, 0.0},
      {"knee_l", 1, 0.0, -0.38, 0.0},
      {"knee_r", 2, 0.0, -0.38, 0.0},
      {"spine2", 3, 0.0, 0.12, 0.0},
      {"ankle_l", 4, 0.0, -0.40, 0.0},
      {"ankle_r", 5, 0.0, -0.40, 0.0},
      {"spine3", 6, 0.0, 0.12, 0.0},
      {"foot_l", 7, 0.0, -0.05, -0.13},
      {"foot_r", 8, 0.0, -0.05, -0.13},
      {"neck", 9, 0.0, 0.12, 0.0},
      {"collar_l", 9, 0.07, 0.07, 0.0},
      {"collar_r", 9, -0.07, 0.07, 0.0},
      {"head", 12, 0.0, 0.18, 0.0},
      {"shoulder_l", 13, 0.10, 0.02, 0.0},
      {"shoulder_r", 14, -0.10, 0.02, 0.0},
      // Arms reach slightly forward (-z) so the rest pose has the depth
      // spread a real body presents to a close camera.
      {"elbow_l", 16, 0.24, 0.0, -0.08},
      {"elbow_r", 17, -0.24, 0.0, -0.08},
      {"wrist_l", 18, 0.22, 0.0, -0.10},
      {"wrist_r", 19, -0.22, 0.0, -0.10},
      {"hand_l", 20, 0.07, 0.0, -0.02},
      {"hand_r", 21, -0.07, 0.0, -0.02},
  };
  Skeleton skel;
  for (const J& j : kJoints) {
    skel.joints.push_back({j.parent, scale * Vec3{j.x, j.y, j.z}, j.name});
  }
  return skel;
}

double segment_radius(int part) {
  switch (part) {
    case 0: return 0.13;   // pelvis
    case 1: case 2: return 0.07;   // pelvis->hip
    case 3: return 0.11;   // lower spine
    case 6: case 9: return 0.12;   // torso
    case 4: case 5: return 0.07;   // thighs
    case 7: case 8: return 0.055;  // calves
    case 10: case 11: return 0.04; // feet
    case 12: return 0.06;  // neck
    case 15: return 0.10;  // head
    case 13: case 14: return 0.05; // collars
    case 16: case 17: return 0.05; // shoulders
    case 18: case 19: return 0.045; // upper arms
    case 20: case 21: return 0.04;  // forearms
    default: return 0.035;          // hands
  }
}

}  // namespace

DefaultBody build_default_body(const BodyConfig& config) {
  if (config.radial_segments < 3 || config.axial_segments < 1 ||
      config.scale <= 0.0) {
    throw InvalidValue("BodyConfig: invalid parameters");
  }
  DefaultBody out;
  out.body.skeleton = default_skeleton(config.scale);
  const auto rest = out.body.skeleton.rest_positions();

  out.regressor.num_joints = kNumJoints;
  out.regressor.rows.resize(kNumJoints);

  const auto uv_cell = [](int part) {
    const int col = part % 5;
    const int row = part / 5;
    const double margin = 0.01;
    return std::pair<Vec2, Vec2>{
        Vec2{col * 0.2 + margin, row * 0.2 + margin},
        Vec2{col * 0.2 + 0.2 - margin, row * 0.2 + 0.2 - margin}};
  };

  const auto set_row = [&](int joint, const std::vector<int>& ring) {
    auto& row = out.regressor.rows[joint];
    for (int v : ring) {
      row.push_back({v, 1.0 / static_cast<double>(ring.size())});
    }
  };

  // Part 0: a short vertical capsule centered on the pelvis. The root row
  // averages both end rings, whose centroid is exactly the origin.
  {
    const double half = 0.05 * config.scale;
    const SegmentSpec seg{0, 0, Vec3{0, -half, 0}, Vec3{0, half, 0},
                          segment_radius(0) * config.scale};
    const auto [lo, hi] = uv_cell(0);
    std::vector<int> ring_a;
    std::vector<int> ring_b =
        append_capsule(seg, config, lo, hi, &out.body, &ring_a);
    ring_a.insert(ring_a.end(), ring_b.begin(), ring_b.end());
    set_row(kPelvisJoint, ring_a);
  }

  // One capsule per bone: parent position -> joint position, bound to the
  // parent joint so rotating a joint swings the bone below it.
  for (int j = 1; j < kNumJoints; ++j) {
    const int parent = out.body.skeleton.joints[j].parent;
    const SegmentSpec seg{j, parent, rest[parent], rest[j],
                          segment_radius(j) * config.scale};
    const auto [lo, hi] = uv_cell(j);
    const auto far_ring = append_capsule(seg, config, lo, hi, &out.body,
                                         nullptr);
    set_row(j, far_ring);
  }

  out.regressor.num_vertices = static_cast<int>(out.body.vertices.size());
  out.body.validate();
  out.regressor.validate();
  return out;
}

std::vector<Vec3> pose_body(const ArticulatedBody& body, const Pose& pose) {
  if (pose.rotations.size() != body.skeleton.joints.size()) {
    throw ShapeMismatch("pose_body: pose joint count mismatch");
  }
  pose.validate();
  const auto transforms = global_transforms(body.skeleton, pose);
  const auto rest = body.skeleton.rest_positions();

  // Per-joint skinning transform G_j * B_j^{-1}; B_j is the pure rest
  // translation, so identity poses yield exact zero offsets.
  std::vector<Affine> skin(transforms.size());
  for (size_t j = 0; j < transforms.size(); ++j) {
    skin[j].rot = transforms[j].rot;
    skin[j].t = transforms[j].t - transforms[j].rot * rest[j];
  }

  std::vector<Vec3> out;
  out.reserve(body.vertices.size());
  for (size_t v = 0; v < body.vertices.size(); ++v) {
    Vec3 p = Vec3::Zero();
    for (const SkinWeight& sw : body.skin_weights[v]) {
      p += sw.weight * skin[sw.joint].apply(body.vertices[v]);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<Vec3> joint_positions(const ArticulatedBody& body,
                                  const Pose& pose) {
  const auto transforms = global_transforms(body.skeleton, pose);
  std::vector<Vec3> out;
  out.reserve(transforms.size());
  for (const Affine& g : transforms) out.push_back(g.t);
  return out;
}

std::vector<Vec3> regress_joints(const JointRegressor& regressor,
                                 std::span<const Vec3> vertices) {
  if (static_cast<int>(vertices.size()) != regressor.num_vertices) {
    throw ShapeMismatch("regress_joints: vertex count mismatch");
  }
  std::vector<Vec3> joints(regressor.num_joints, Vec3::Zero());
  for (int j = 0; j < regressor.num_joints; ++j) {
    for (const auto& [v, w] : regressor.rows[j]) {
      joints[j] += w * vertices[v];
    }
  }
  return joints;
}

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void save_body(const ArticulatedBody& body, const JointRegressor& regressor,
               const std::string& obj_path,
               const std::string& sidecar_path) {
  std::ofstream obj(obj_path);
  if (!obj) throw IoError("cannot open " + obj_path + " for writing");
  for (const Vec3& v : body.vertices) {
    obj << "v " << format_double(v.x()) << " " << format_double(v.y()) << " "
        << format_double(v.z()) << "\n";
  }
  for (const auto& f : body.faces) {
    obj << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  }
  if (!obj) throw IoError("write failed: " + obj_path);

  Json j;
  j["part_id"] = body.part_id;
  auto& uv = j["uv"] = Json::array();
  for (const Vec2& t : body.uv) uv.push_back({t.x(), t.y()});
  auto& weights = j["skin_weights"] = Json::array();
  for (const auto& per_vertex : body.skin_weights) {
    Json row = Json::array();
    for (const SkinWeight& w : per_vertex) row.push_back({w.joint, w.weight});
    weights.push_back(std::move(row));
  }
  auto& skel = j["skeleton"] = Json::array();
  for (const Joint& joint : body.skeleton.joints) {
    skel.push_back({{"parent", joint.parent},
                    {"offset", {joint.offset.x(), joint.offset.y(),
                                joint.offset.z()}},
                    {"name", joint.name}});
  }
  Json reg;
  reg["num_joints"] = regressor.num_joints;
  reg["num_vertices"] = regressor.num_vertices;
  auto& rows = reg["rows"] = Json::array();
  for (const auto& row : regressor.rows) {
    Json r = Json::array();
    for (const auto& [v, w] : row) r.push_back({v, w});
    rows.push_back(std::move(r));
  }
  j["regressor"] = std::move(reg);
  save_json_file(sidecar_path, j);
}

DefaultBody load_body(const std::string& obj_path,
                      const std::string& sidecar_path) {
  std::ifstream obj(obj_path);
  if (!obj) throw IoError("cannot open " + obj_path);
  DefaultBody out;
  std::string line;
  int line_no = 0;
  while (std::getline(obj, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) {
        throw IoError(obj_path + ":" + std::to_string(line_no) +
                      ": malformed vertex line");
      }
      out.body.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      if (!(ss >> f[0] >> f[1] >> f[2])) {
        throw IoError(obj_path + ":" + std::to_string(line_no) +
                      ": malformed face line");
      }
      for (int& idx : f) idx -= 1;  // OBJ is 1-based
      out.body.faces.push_back(f);
    }
  }

  const Json j = load_json_file(sidecar_path);
  try {
    out.body.part_id = j.at("part_id").get<std::vector<int>>();
    for (const auto& t : j.at("uv")) {
      out.body.uv.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
    }
    for (const auto& row : j.at("skin_weights")) {
      std::vector<SkinWeight> per_vertex;
      for (const auto& w : row) {
        per_vertex.push_back({w.at(0).get<int>(), w.at(1).get<double>()});
      }
      out.body.skin_weights.push_back(std::move(per_vertex));
    }
    for (const auto& joint : j.at("skeleton")) {
      const auto& off = joint.at("offset");
      out.body.skeleton.joints.push_back(
          {joint.at("parent").get<int>(),
           Vec3{off.at(0).get<double>(), off.at(1).get<double>(),
                off.at(2).get<double>()},
           joint.at("name").get<std::string>()});
    }
    const Json& reg = j.at("regressor");
    out.regressor.num_joints = reg.at("num_joints").get<int>();
    out.regressor.num_vertices = reg.at("num_vertices").get<int>();
    for (const auto& row : reg.at("rows")) {
      std::vector<std::pair<int, double>> r;
      for (const auto& e : row) {
        r.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
      }
      out.regressor.rows.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw IoError(sidecar_path + ": " + e.what());
  }

  out.body.validate();
  out.regressor.validate();
  return out;
}

}  // namespace pd
