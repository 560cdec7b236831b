#include "seglabel/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

#include "seglabel/errors.hpp"
#include "seglabel/rng.hpp"

namespace seglabel {

namespace {

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h -= std::floor(h);  // wrap hue into [0,1)
  const double h6 = h * 6.0;
  const int sector = std::min(5, static_cast<int>(h6));
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

double circular_distance(double a, double b) {
  const double d = std::abs(a - b) - std::floor(std::abs(a - b));
  return std::min(d, 1.0 - d);
}

struct PlacedPart {
  const PartSpec* part = nullptr;
  Vec3 center;
};

}  // namespace

void SceneSpec::validate() const {
  label_space.validate();
  if (!(sigma >= 0.0)) throw config_error("scene spec: sigma must be >= 0");
  if (points_per_part < 4) throw config_error("scene spec: points_per_part must be >= 4");
  if (!(spacing > 0.0)) throw config_error("scene spec: spacing must be positive");
  if (base_z_max < base_z_min) throw config_error("scene spec: empty base height band");
  if (num_views < 1) throw config_error("scene spec: at least one view required");
  if (retry_budget < 1) throw config_error("scene spec: retry budget must be >= 1");
  if (assemblies.empty()) throw config_error("scene spec: no assemblies");
  for (const AssemblySpec& a : assemblies) {
    if (a.count < 0) throw config_error("scene spec: negative assembly count");
    if (a.parts.empty()) throw config_error("scene spec: assembly '" + a.name + "' has no parts");
    for (const PartSpec& p : a.parts) {
      if (label_space.index_of(p.class_name) < 0)
        throw config_error("scene spec: unknown class '" + p.class_name + "'");
      for (const std::string& extra : p.extra_classes)
        if (label_space.index_of(extra) < 0)
          throw config_error("scene spec: unknown class '" + extra + "'");
      if (!(p.width > 0.0) || !(p.depth > 0.0))
        throw config_error("scene spec: part patches need positive extents");
    }
  }
  for (const RelationRule& r : rules) {
    if (label_space.index_of(r.above_class) < 0 || label_space.index_of(r.below_class) < 0)
      throw config_error("scene spec: rule '" + r.name + "' references an undeclared class");
    if (r.dz_max < r.dz_min || !(r.max_horizontal >= 0.0))
      throw config_error("scene spec: rule '" + r.name + "' has an empty band");
  }
  for (const auto& [name, model] : colors) {
    if (label_space.index_of(name) < 0)
      throw config_error("scene spec: color model for undeclared class '" + name + "'");
    if (!(model.sigma >= 0.0)) throw config_error("scene spec: negative color spread");
  }
  if (separable) {
    double max_sigma = 0.0;
    for (const auto& [name, model] : colors) max_sigma = std::max(max_sigma, model.sigma);
    for (auto a = colors.begin(); a != colors.end(); ++a)
      for (auto b = std::next(a); b != colors.end(); ++b)
        if (circular_distance(a->second.mean_h, b->second.mean_h) < 4.0 * max_sigma)
          throw config_error("scene spec: separable=true needs hue means spaced >= 4 sigma ('" +
                             a->first + "' vs '" + b->first + "')");
    for (size_t i = 0; i < rules.size(); ++i)
      for (size_t j = i + 1; j < rules.size(); ++j)
        if (rules[i].dz_min <= rules[j].dz_max && rules[j].dz_min <= rules[i].dz_max)
          throw config_error("scene spec: separable=true needs disjoint rule bands ('" +
                             rules[i].name + "' overlaps '" + rules[j].name + "')");
  }
}

LabeledScene generate_scene(const SceneSpec& spec, const std::string& id) {
  spec.validate();
  Rng rng(spec.seed);
  const double rule_margin = 0.01 + 4.0 * spec.sigma;

  // Expand assembly instances and assign deterministic grid anchors.
  std::vector<const AssemblySpec*> instances;
  for (const AssemblySpec& a : spec.assemblies)
    for (int c = 0; c < a.count; ++c) instances.push_back(&a);
  if (instances.empty()) throw config_error("scene spec: zero assembly instances");
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(
                                    static_cast<double>(instances.size())))));

  std::vector<std::vector<PlacedPart>> placed(instances.size());
  for (size_t inst = 0; inst < instances.size(); ++inst) {
    const AssemblySpec& assembly = *instances[inst];
    const double ax = static_cast<double>(static_cast<int>(inst) % cols) * spec.spacing +
                      rng.uniform(-0.1, 0.1) * spec.spacing;
    const double ay = static_cast<double>(static_cast<int>(inst) / cols) * spec.spacing +
                      rng.uniform(-0.1, 0.1) * spec.spacing;
    const double base_z = rng.uniform(spec.base_z_min, spec.base_z_max);

    std::string violated;
    bool ok = false;
    for (int attempt = 0; attempt < spec.retry_budget && !ok; ++attempt) {
      std::vector<PlacedPart> parts;
      parts.reserve(assembly.parts.size());
      for (const PartSpec& p : assembly.parts) {
        PlacedPart pp;
        pp.part = &p;
        pp.center = {ax + rng.uniform(-p.horizontal_jitter, p.horizontal_jitter),
                     ay + rng.uniform(-p.horizontal_jitter, p.horizontal_jitter),
                     base_z + p.dz + rng.uniform(-p.dz_jitter, p.dz_jitter)};
        parts.push_back(pp);
      }
      // Within-assembly rule check against the margin-shrunk band so the
      // emitted centroids stay inside the stated band despite point jitter.
      ok = true;
      for (const RelationRule& rule : spec.rules) {
        for (const PlacedPart& above : parts) {
          if (above.part->class_name != rule.above_class) continue;
          for (const PlacedPart& below : parts) {
            if (below.part->class_name != rule.below_class) continue;
            const double dz = above.center.z - below.center.z;
            const double dh = std::hypot(above.center.x - below.center.x,
                                         above.center.y - below.center.y);
            if (dz < rule.dz_min + rule_margin || dz > rule.dz_max - rule_margin ||
                dh > rule.max_horizontal - rule_margin) {
              ok = false;
              violated = rule.name;
            }
          }
        }
        if (!ok) break;
      }
      if (ok) placed[inst] = std::move(parts);
    }
    if (!ok)
      throw generation_error("rule '" + violated + "' unsatisfiable for assembly '" +
                             assembly.name + "' after " + std::to_string(spec.retry_budget) +
                             " attempts");
  }

  // Camera views on a ring around the anchor grid.
  Scene scene;
  double cx = 0.0, cy = 0.0, extent = 0.0;
  long total_parts = 0;
  for (const auto& parts : placed)
    for (const PlacedPart& pp : parts) {
      cx += pp.center.x;
      cy += pp.center.y;
      ++total_parts;
    }
  cx /= static_cast<double>(total_parts);
  cy /= static_cast<double>(total_parts);
  for (const auto& parts : placed)
    for (const PlacedPart& pp : parts)
      extent = std::max(extent, std::hypot(pp.center.x - cx, pp.center.y - cy));
  for (int v = 0; v < spec.num_views; ++v) {
    const double angle = 2.0 * M_PI * v / spec.num_views + 0.3;
    scene.views.push_back(
        {v, {cx + (extent + 1.5) * std::cos(angle), cy + (extent + 1.5) * std::sin(angle), 1.5}});
  }

  // Points, one rectangular grid per part, jittered and colored.
  const ColorModel default_color;
  std::vector<std::vector<int>> part_points;
  std::vector<const PartSpec*> part_specs;
  for (const auto& parts : placed)
    for (const PlacedPart& pp : parts) {
      const PartSpec& p = *pp.part;
      const auto color_it = spec.colors.find(p.class_name);
      const ColorModel& color = color_it == spec.colors.end() ? default_color : color_it->second;
      Vec3 u, v;
      if (p.vertical) {
        u = {-std::sin(p.yaw), std::cos(p.yaw), 0.0};
        v = {0.0, 0.0, 1.0};
      } else {
        u = {std::cos(p.yaw), std::sin(p.yaw), 0.0};
        v = {-std::sin(p.yaw), std::cos(p.yaw), 0.0};
      }
      const int gx = std::max(2, static_cast<int>(std::lround(std::sqrt(
                                     spec.points_per_part * p.width / p.depth))));
      const int gy = std::max(
          2, static_cast<int>(std::ceil(static_cast<double>(spec.points_per_part) / gx)));
      int view_id = 0;
      double best = std::numeric_limits<double>::infinity();
      for (const CameraView& view : scene.views) {
        const double d = distance(view.origin, pp.center);
        if (d < best) {
          best = d;
          view_id = view.view_id;
        }
      }
      std::vector<int> indices;
      for (int i = 0; i < gx; ++i)
        for (int j = 0; j < gy; ++j) {
          const double du = (static_cast<double>(i) / (gx - 1) - 0.5) * p.width;
          const double dv = (static_cast<double>(j) / (gy - 1) - 0.5) * p.depth;
          Point point;
          point.position = {pp.center.x + du * u.x + dv * v.x + spec.sigma * rng.normal(),
                            pp.center.y + du * u.y + dv * v.y + spec.sigma * rng.normal(),
                            pp.center.z + du * u.z + dv * v.z + spec.sigma * rng.normal()};
          const double h = color.mean_h + color.sigma * rng.normal();
          const double s = std::clamp(color.mean_s + color.sigma * rng.normal(), 0.02, 0.98);
          const double val = std::clamp(color.mean_v + color.sigma * rng.normal(), 0.02, 0.98);
          point.rgb = hsv_to_rgb(h, s, val);
          point.view_id = view_id;
          indices.push_back(static_cast<int>(scene.points.size()));
          scene.points.push_back(point);
        }
      part_points.push_back(std::move(indices));
      part_specs.push_back(&p);
    }

  for (size_t s = 0; s < part_points.size(); ++s)
    scene.segments.push_back(make_segment(static_cast<int>(s), part_points[s], scene));
  scene.validate();

  Labeling truth(static_cast<int>(part_specs.size()), spec.label_space.size());
  for (size_t s = 0; s < part_specs.size(); ++s) {
    truth.at(static_cast<int>(s), spec.label_space.index_of(part_specs[s]->class_name)) = 1.0;
    if (spec.label_space.mode == LabelMode::MultiLabel)
      for (const std::string& extra : part_specs[s]->extra_classes)
        truth.at(static_cast<int>(s), spec.label_space.index_of(extra)) = 1.0;
  }

  const AuditReport audit = audit_scene(scene, truth, spec);
  if (!audit.ok)
    throw generation_error("generated scene violates " + audit.violations.front());
  return {std::move(scene), std::move(truth), id};
}

std::vector<LabeledScene> generate_dataset(const SceneSpec& spec, int n_scenes,
                                           uint64_t master_seed) {
  if (n_scenes < 1) throw config_error("generate_dataset: n_scenes must be >= 1");
  std::vector<LabeledScene> out(n_scenes);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_scenes; ++i) {
    try {
      SceneSpec derived = spec;
      derived.seed = derive_seed(master_seed, static_cast<uint64_t>(i));
      char name[32];
      std::snprintf(name, sizeof(name), "scene-%03d", i);
      out[i] = generate_scene(derived, name);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

AuditReport audit_scene(const Scene& scene, const Labeling& truth, const SceneSpec& spec) {
  AuditReport report;
  if (truth.rows() != static_cast<int>(scene.segments.size()) ||
      truth.cols() != spec.label_space.size())
    throw data_error("audit_scene: labeling shape mismatch");
  for (const RelationRule& rule : spec.rules) {
    const int above = spec.label_space.index_of(rule.above_class);
    const int below = spec.label_space.index_of(rule.below_class);
    for (const Segment& seg : scene.segments) {
      if (truth.at(seg.id, above) != 1.0) continue;
      bool satisfied = false;
      for (const Segment& other : scene.segments) {
        if (other.id == seg.id || truth.at(other.id, below) != 1.0) continue;
        const double dz = seg.centroid.z - other.centroid.z;
        const double dh = std::hypot(seg.centroid.x - other.centroid.x,
                                     seg.centroid.y - other.centroid.y);
        if (dz >= rule.dz_min && dz <= rule.dz_max && dh <= rule.max_horizontal) {
          satisfied = true;
          break;
        }
      }
      if (!satisfied) {
        report.ok = false;
        report.violations.push_back("rule '" + rule.name + "' for segment " +
                                    std::to_string(seg.id));
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

SceneSpec preset_separable() {
  SceneSpec spec;
  spec.label_space.class_names = {"floor", "wall", "tableTop", "tableLeg", "monitor", "keyboard"};
  spec.label_space.objects = {{"table", {"tableTop", "tableLeg"}}};
  spec.label_space.mode = LabelMode::Exclusive;
  spec.colors = {
      {"floor", {0.05, 0.55, 0.45, 0.02}},    {"wall", {0.35, 0.45, 0.75, 0.02}},
      {"tableTop", {0.60, 0.60, 0.55, 0.02}}, {"tableLeg", {0.75, 0.55, 0.40, 0.02}},
      {"monitor", {0.90, 0.65, 0.50, 0.02}},  {"keyboard", {0.20, 0.50, 0.60, 0.02}},
  };

  AssemblySpec room;
  room.name = "room";
  room.count = 1;
  PartSpec floor;
  floor.class_name = "floor";
  floor.width = 1.2;
  floor.depth = 1.2;
  floor.dz = 0.0;
  floor.horizontal_jitter = 0.05;
  PartSpec wall;
  wall.class_name = "wall";
  wall.width = 1.2;
  wall.depth = 0.8;  // vertical extent
  wall.vertical = true;
  wall.dz = 1.2;
  wall.horizontal_jitter = 0.05;
  room.parts = {floor, wall};

  AssemblySpec workstation;
  workstation.name = "workstation";
  workstation.count = 4;
  PartSpec leg;
  leg.class_name = "tableLeg";
  leg.width = 0.12;
  leg.depth = 0.55;
  leg.vertical = true;
  leg.dz = 0.38;
  leg.dz_jitter = 0.01;
  leg.horizontal_jitter = 0.02;
  PartSpec top;
  top.class_name = "tableTop";
  top.width = 0.8;
  top.depth = 0.5;
  top.dz = 0.72;
  top.dz_jitter = 0.01;
  top.horizontal_jitter = 0.02;
  PartSpec keyboard;
  keyboard.class_name = "keyboard";
  keyboard.width = 0.35;
  keyboard.depth = 0.15;
  keyboard.dz = 0.78;
  keyboard.dz_jitter = 0.01;
  keyboard.horizontal_jitter = 0.08;
  PartSpec monitor;
  monitor.class_name = "monitor";
  monitor.width = 0.45;
  monitor.depth = 0.30;
  monitor.vertical = true;
  monitor.dz = 0.95;
  monitor.dz_jitter = 0.01;
  monitor.horizontal_jitter = 0.08;
  workstation.parts = {leg, top, keyboard, monitor};

  spec.assemblies = {room, workstation};
  spec.rules = {
      {"monitor-above-tableTop", "monitor", "tableTop", 0.15, 0.35, 0.45},
      {"keyboard-above-tableTop", "keyboard", "tableTop", 0.00, 0.12, 0.45},
  };
  spec.separable = true;
  return spec;
}

SceneSpec preset_stacks(int stacks, double gap) {
  SceneSpec spec;
  spec.label_space.class_names = {"slabA", "slabB", "slabC", "slabD"};
  spec.label_space.objects = {{"stack", {"slabA", "slabB", "slabC", "slabD"}}};
  spec.label_space.mode = LabelMode::Exclusive;
  const ColorModel gray{0.5, 0.5, 0.5, 0.05};
  for (const std::string& name : spec.label_space.class_names) spec.colors[name] = gray;

  AssemblySpec stack;
  stack.name = "stack";
  stack.count = stacks;
  for (int s = 0; s < 4; ++s) {
    PartSpec slab;
    slab.class_name = spec.label_space.class_names[s];
    slab.width = 0.4;
    slab.depth = 0.4;
    slab.dz = gap * s;
    slab.dz_jitter = 0.01;
    slab.horizontal_jitter = 0.03;
    stack.parts.push_back(slab);
  }
  spec.assemblies = {stack};
  for (int s = 0; s + 1 < 4; ++s)
    spec.rules.push_back({spec.label_space.class_names[s + 1] + "-above-" +
                              spec.label_space.class_names[s],
                          spec.label_space.class_names[s + 1], spec.label_space.class_names[s],
                          gap - 0.08, gap + 0.08, 0.3});
  spec.base_z_min = 0.0;
  spec.base_z_max = 1.2;
  return spec;
}

SceneSpec preset_chain(int length, double gap) {
  if (length < 2) throw config_error("preset_chain: length must be >= 2");
  SceneSpec spec;
  spec.label_space.class_names = {"slabB", "slabA"};
  spec.label_space.mode = LabelMode::Exclusive;
  const ColorModel gray{0.5, 0.5, 0.5, 0.05};
  spec.colors = {{"slabB", gray}, {"slabA", gray}};

  AssemblySpec chain;
  chain.name = "chain";
  chain.count = 2;
  for (int s = 0; s < length; ++s) {
    PartSpec slab;
    slab.class_name = s % 2 == 0 ? "slabB" : "slabA";
    slab.width = 0.4;
    slab.depth = 0.4;
    slab.dz = gap * s;
    slab.dz_jitter = 0.01;
    slab.horizontal_jitter = 0.03;
    chain.parts.push_back(slab);
  }
  spec.assemblies = {chain};
  if (length == 2)
    spec.rules = {{"slabA-above-slabB", "slabA", "slabB", gap - 0.08, gap + 0.08, 0.3}};
  spec.base_z_min = 0.0;
  spec.base_z_max = 1.0;
  return spec;
}

}  // namespace seglabel
