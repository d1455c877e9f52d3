#include "courtlab/qa_generation.hpp"

#include "courtlab/camera.hpp"
#include "courtlab/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace courtlab {

namespace {

constexpr std::array<std::string_view, 7> kQuestionJoints = {
    "head", "left_wrist", "right_wrist", "left_knee", "right_knee", "left_ankle", "right_ankle"};

// Bounded draw by rejection. The std distributions are not specified
// bit-exactly across standard libraries, and the output must be.
std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[pick(rng, i)]);
}

std::string player_key(int label) { return "player:" + std::to_string(label); }

const PlayerState& require_player(const SceneState& scene, const EntityRef& ref) {
  if (ref.kind != EntityRef::Kind::player)
    throw Error(ErrorCode::invalid_argument, "expected a player, got " + to_string(ref));
  const auto* p = find_player(scene, ref.player);
  if (!p) throw Error(ErrorCode::missing_entity, "no Player " + std::to_string(ref.player));
  return *p;
}

const EntityRef& require(const std::optional<EntityRef>& ref, const char* what) {
  if (!ref) throw Error(ErrorCode::invalid_argument, std::string("question needs ") + what);
  return *ref;
}

void float_answer(DerivedAnswer& out, double value, const std::string& label, double threshold) {
  out.value = value;
  out.margin = value;
  out.ambiguous = !(value >= threshold);
  out.distances.emplace_back(label, value);
}

void nearest_answer(DerivedAnswer& out, std::vector<std::pair<int, double>> cands, double threshold) {
  if (cands.size() < 2)
    throw Error(ErrorCode::missing_entity, "nearest-player questions need two candidate players");
  std::sort(cands.begin(), cands.end());
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].second < cands[best].second) best = i;
  double runner_up = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (i != best) runner_up = std::min(runner_up, cands[i].second);
  out.value = player_key(cands[best].first);
  out.margin = runner_up - cands[best].second;
  out.ambiguous = out.margin < threshold;
  for (const auto& [label, d] : cands) {
    out.candidates.push_back(label);
    out.distances.emplace_back(player_key(label), d);
  }
}

void ego_answer(DerivedAnswer& out, const PlayerState& observer, const Vec3& target,
                double min_sin) {
  const Vec2 d = target.head<2>() - observer.pelvis.head<2>();
  const Vec2 f = observer.facing;
  const double n = d.norm() * f.norm();
  const double s = n > 0.0 ? (f.x() * d.y() - f.y() * d.x()) / n : 0.0;
  out.value = std::string(s > 0.0 ? "left" : "right");
  out.margin = std::abs(s);
  out.ambiguous = out.margin < min_sin;
  out.distances.emplace_back("sin_angle", s);
}

void camera_side_answer(DerivedAnswer& out, double du, double band_px) {
  const double a = std::abs(du);
  if (!std::isfinite(du)) {
    out.value = std::string("front_behind");
    out.margin = 0.0;
    out.ambiguous = true;
    return;
  }
  out.value = std::string(a <= band_px ? "front_behind" : (du < 0.0 ? "left" : "right"));
  out.margin = std::abs(a - band_px);
  out.ambiguous = out.margin < 0.5 * band_px;
  out.distances.emplace_back("delta_u_px", du);
}

double image_u(const SceneState& scene, const Vec3& p) {
  const auto pr = project(scene.camera, p);
  return pr.behind ? std::numeric_limits<double>::quiet_NaN() : pr.pixel.x();
}

void zone_answer(DerivedAnswer& out, const Vec3& p, const CourtSpec& spec) {
  ZoneResult z;
  try {
    z = zone_of(p, spec);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::out_of_play) throw;
    out.value = std::string("backcourt");
    out.margin = 0.0;
    out.ambiguous = true;
    return;
  }
  out.value = std::string(to_string(z.zone));
  out.margin = z.boundary_margin_m;
  out.ambiguous = out.margin < spec.ambiguity.depth_m;
  out.distances.emplace_back("boundary_margin", z.boundary_margin_m);
}

}  // namespace

std::span<const std::string_view> question_joints() noexcept { return kQuestionJoints; }

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  // splitmix64 finaliser over the combined words
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DerivedAnswer derive_answer(const SceneState& scene, const CourtSpec& spec, QuestionType type,
                            const QueryParams& params) {
  const auto& th = spec.ambiguity;
  DerivedAnswer out;
  auto pos = [&](const EntityRef& r) { return entity_position(scene, r); };

  switch (type) {
    case QuestionType::cam_obj_distance: {
      const auto& a = require(params.a, "an object");
      float_answer(out, (scene.camera.center() - pos(a)).norm(), to_string(a), th.lateral_m);
      break;
    }
    case QuestionType::obj_obj_distance: {
      const auto& a = require(params.a, "a first object");
      const auto& b = require(params.b, "a second object");
      float_answer(out, (pos(a) - pos(b)).norm(), to_string(a) + "|" + to_string(b), th.lateral_m);
      break;
    }
    case QuestionType::obj_line_distance: {
      const auto& a = require(params.a, "an object");
      if (params.line.empty()) throw Error(ErrorCode::invalid_argument, "question needs a line");
      float_answer(out, line_distance(pos(a), params.line, spec), to_string(a) + "|" + params.line,
                   th.lateral_m);
      break;
    }
    case QuestionType::height: {
      const auto& a = require(params.a, "an object");
      float_answer(out, pos(a).z() - spec.surface_height_m, to_string(a), th.lateral_m);
      break;
    }
    case QuestionType::player_count: {
      out.value = static_cast<long long>(visible_players(scene).size());
      break;
    }
    case QuestionType::ball_visible: {
      const bool seen = scene.ball && scene.ball->visible;
      out.value = std::string(seen ? "yes" : "no");
      break;
    }
    case QuestionType::localization: {
      const Vec3 p = pos(require(params.a, "an object"));
      out.value = Vec3(p.x(), p.y(), p.z() - spec.surface_height_m);
      break;
    }
    case QuestionType::pp_nearest: {
      const auto& ref = require_player(scene, require(params.a, "a reference player"));
      std::vector<std::pair<int, double>> cands;
      for (const auto& p : scene.players)
        if (p.label != ref.label) cands.emplace_back(p.label, (p.pelvis - ref.pelvis).norm());
      nearest_answer(out, std::move(cands), th.lateral_m);
      break;
    }
    case QuestionType::bp_nearest:
    case QuestionType::cp_nearest: {
      const Vec3 q = type == QuestionType::bp_nearest ? pos(EntityRef::ball()) : scene.camera.center();
      std::vector<std::pair<int, double>> cands;
      for (const auto& p : scene.players) cands.emplace_back(p.label, (p.pelvis - q).norm());
      nearest_answer(out, std::move(cands), th.lateral_m);
      break;
    }
    case QuestionType::pl_nearest: {
      if (params.line.empty()) throw Error(ErrorCode::invalid_argument, "question needs a line");
      std::vector<std::pair<int, double>> cands;
      for (const auto& p : scene.players)
        cands.emplace_back(p.label, line_distance(p.pelvis, params.line, spec));
      nearest_answer(out, std::move(cands), th.lateral_m);
      break;
    }
    case QuestionType::pp_ego_side: {
      const auto& obs = require_player(scene, require(params.a, "an observer"));
      const auto& tgt = require_player(scene, require(params.b, "a target player"));
      if (obs.label == tgt.label)
        throw Error(ErrorCode::invalid_argument, "observer and target are the same player");
      ego_answer(out, obs, tgt.pelvis, th.egocentric_sin);
      break;
    }
    case QuestionType::bp_ego_side: {
      const auto& obs = require_player(scene, require(params.a, "an observer"));
      ego_answer(out, obs, pos(EntityRef::ball()), th.egocentric_sin);
      break;
    }
    case QuestionType::cp_ego_side: {
      const auto& obs = require_player(scene, require(params.a, "an observer"));
      ego_answer(out, obs, scene.camera.center(), th.egocentric_sin);
      break;
    }
    case QuestionType::pp_camera_side: {
      const auto& a = require_player(scene, require(params.a, "a first player"));
      const auto& b = require_player(scene, require(params.b, "a second player"));
      if (a.label == b.label)
        throw Error(ErrorCode::invalid_argument, "both sides name the same player");
      camera_side_answer(out, image_u(scene, a.pelvis) - image_u(scene, b.pelvis), th.camera_view_px);
      break;
    }
    case QuestionType::bp_camera_side: {
      const auto& a = require_player(scene, require(params.a, "a player"));
      camera_side_answer(out, image_u(scene, a.pelvis) - image_u(scene, pos(EntityRef::ball())),
                         th.camera_view_px);
      break;
    }
    case QuestionType::cp_camera_side: {
      const auto& a = require_player(scene, require(params.a, "a player"));
      camera_side_answer(out, image_u(scene, a.pelvis) - scene.camera.cx, th.camera_view_px);
      break;
    }
    case QuestionType::ball_zone: {
      const Vec3 p = pos(EntityRef::ball());
      if (spec.sport == Sport::table_tennis) {
        const double d = p.y() - 0.5 * spec.width_m;
        const double band = th.center_line_m;
        out.value = std::string(std::abs(d) <= band ? "center" : (d < 0.0 ? "left" : "right"));
        out.margin = std::abs(std::abs(d) - band);
        out.ambiguous = out.margin < 0.5 * band;
        out.distances.emplace_back("offset_from_center_line", d);
      } else {
        zone_answer(out, p, spec);
      }
      break;
    }
    case QuestionType::ball_net_height: {
      const double dz = pos(EntityRef::ball()).z() - spec.net_top_center_z();
      out.value = std::string(dz > 0.0 ? "above" : "below");
      out.margin = std::abs(dz);
      out.ambiguous = out.margin < th.lateral_m;
      out.distances.emplace_back("height_over_net", dz);
      break;
    }
    case QuestionType::player_zone: {
      if (spec.sport == Sport::table_tennis)
        throw Error(ErrorCode::invalid_argument, "player zones are not defined for table tennis");
      zone_answer(out, require_player(scene, require(params.a, "a player")).pelvis, spec);
      break;
    }
  }
  return out;
}

namespace {

bool ball_usable(const SceneState& scene) {
  return scene.ball && scene.ball->visible && scene.ball->position.has_value();
}

int owner_of(const EntityRef& r) {
  return r.kind == EntityRef::Kind::player || r.kind == EntityRef::Kind::joint ? r.player : -1;
}

// Object candidates grouped so balls, pelvises and joints are drawn at
// comparable rates regardless of how many joints a scene carries.
std::vector<std::vector<EntityRef>> object_classes(const SceneState& scene) {
  std::vector<std::vector<EntityRef>> classes(3);
  if (ball_usable(scene)) classes[0].push_back(EntityRef::ball());
  std::vector<const PlayerState*> players;
  for (const auto& p : scene.players) players.push_back(&p);
  std::sort(players.begin(), players.end(),
            [](const PlayerState* a, const PlayerState* b) { return a->label < b->label; });
  for (const auto* p : players) {
    classes[1].push_back(EntityRef::of_player(p->label));
    for (auto j : kQuestionJoints)
      if (p->joints.count(std::string(j))) classes[2].push_back(EntityRef::of_joint(p->label, std::string(j)));
  }
  return classes;
}

std::optional<EntityRef> pick_object(std::vector<std::vector<EntityRef>> classes,
                                     std::mt19937_64& rng, int exclude_owner = -2) {
  if (exclude_owner != -2)
    for (auto& c : classes)
      c.erase(std::remove_if(c.begin(), c.end(),
                             [&](const EntityRef& r) { return owner_of(r) == exclude_owner; }),
              c.end());
  std::vector<const std::vector<EntityRef>*> nonempty;
  for (const auto& c : classes)
    if (!c.empty()) nonempty.push_back(&c);
  if (nonempty.empty()) return std::nullopt;
  const auto& c = *nonempty[pick(rng, nonempty.size())];
  return c[pick(rng, c.size())];
}

std::vector<int> player_labels(const SceneState& scene) {
  std::vector<int> out;
  for (const auto& p : scene.players) out.push_back(p.label);
  std::sort(out.begin(), out.end());
  return out;
}

struct Binding {
  std::optional<QueryParams> params;
  std::string skip_reason;
};

Binding bind(QuestionType type, const SceneState& scene, const CourtSpec& spec,
             std::mt19937_64& rng) {
  QueryParams q;
  const auto labels = player_labels(scene);
  auto fail = [](std::string why) { return Binding{std::nullopt, std::move(why)}; };
  auto random_line = [&]() { return spec.lines[pick(rng, spec.lines.size())].name; };

  switch (type) {
    case QuestionType::cam_obj_distance:
    case QuestionType::height:
    case QuestionType::localization: {
      q.a = pick_object(object_classes(scene), rng);
      if (!q.a) return fail("no objects");
      break;
    }
    case QuestionType::obj_obj_distance: {
      const auto classes = object_classes(scene);
      q.a = pick_object(classes, rng);
      if (!q.a) return fail("no objects");
      q.b = pick_object(classes, rng, owner_of(*q.a));
      if (!q.b) return fail("no second object");
      break;
    }
    case QuestionType::obj_line_distance: {
      q.a = pick_object(object_classes(scene), rng);
      if (!q.a) return fail("no objects");
      q.line = random_line();
      break;
    }
    case QuestionType::player_count:
    case QuestionType::ball_visible:
      break;
    case QuestionType::ball_zone:
    case QuestionType::ball_net_height:
      if (!ball_usable(scene)) return fail("ball not visible");
      q.a = EntityRef::ball();
      break;
    case QuestionType::bp_nearest:
      if (!ball_usable(scene)) return fail("ball not visible");
      if (labels.size() < 2) return fail("fewer than two players");
      q.b = EntityRef::ball();
      break;
    case QuestionType::cp_nearest:
      if (labels.size() < 2) return fail("fewer than two players");
      break;
    case QuestionType::pl_nearest:
      if (labels.size() < 2) return fail("fewer than two players");
      q.line = random_line();
      break;
    case QuestionType::pp_nearest:
      if (labels.size() < 3) return fail("fewer than three players");
      q.a = EntityRef::of_player(labels[pick(rng, labels.size())]);
      break;
    case QuestionType::pp_ego_side:
    case QuestionType::pp_camera_side: {
      if (labels.size() < 2) return fail("fewer than two players");
      const std::size_t i = pick(rng, labels.size());
      std::size_t j = pick(rng, labels.size() - 1);
      if (j >= i) ++j;
      q.a = EntityRef::of_player(labels[i]);
      q.b = EntityRef::of_player(labels[j]);
      break;
    }
    case QuestionType::bp_ego_side:
    case QuestionType::bp_camera_side:
      if (!ball_usable(scene)) return fail("ball not visible");
      if (labels.empty()) return fail("no players");
      q.a = EntityRef::of_player(labels[pick(rng, labels.size())]);
      q.b = EntityRef::ball();
      break;
    case QuestionType::cp_ego_side:
    case QuestionType::cp_camera_side:
      if (labels.empty()) return fail("no players");
      q.a = EntityRef::of_player(labels[pick(rng, labels.size())]);
      break;
    case QuestionType::player_zone:
      if (spec.sport == Sport::table_tennis) return fail("not defined for table tennis");
      if (labels.empty()) return fail("no players");
      q.a = EntityRef::of_player(labels[pick(rng, labels.size())]);
      break;
  }
  return Binding{q, {}};
}

std::string fill(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const auto close = text.find('}', open);
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 1, close - open - 1));
    auto it = values.find(name);
    if (it == values.end())
      throw Error(ErrorCode::invalid_argument, "no value for placeholder {" + name + "}");
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

std::map<std::string, std::string> placeholder_values(QuestionType type, const QueryParams& q,
                                                      const CourtSpec& spec) {
  std::map<std::string, std::string> v;
  const bool table = spec.sport == Sport::table_tennis;
  v["ball"] = spec.ball_name;
  v["surface"] = table ? "the table surface" : "the court surface";
  v["surface_region"] = table ? "the table surface" : "the court zone";
  if (!q.line.empty()) v["line"] = spec.line(q.line).display_name;
  switch (type) {
    case QuestionType::obj_obj_distance:
      v["object1"] = describe(*q.a, spec);
      v["object2"] = describe(*q.b, spec);
      break;
    case QuestionType::pp_ego_side:
    case QuestionType::pp_camera_side:
      v["player1"] = describe(*q.a, spec);
      v["player2"] = describe(*q.b, spec);
      break;
    default:
      if (q.a) {
        v["object"] = describe(*q.a, spec);
        v["player"] = v["object"];
      }
      break;
  }
  return v;
}

std::string letter_of(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

std::string option_text_for_player(int label) { return "Player " + std::to_string(label); }

void add_ratio(QAItem& item, const SceneState& scene, const CourtSpec& spec) {
  if (item.subcategory != Subcategory::object_object && item.subcategory != Subcategory::object_line)
    return;
  try {
    const double r = ambiguity_ratio(item, scene, spec);
    item.meta.ratio_3d_2d = r;
    if (std::isinf(r)) item.meta.flags.push_back("ratio_infinite");
  } catch (const Error&) {
    item.meta.flags.push_back("ratio_unavailable");
  }
}

}  // namespace

InstantiateResult instantiate_with(const QuestionTemplate& tmpl, const SceneState& scene,
                                   const CourtSpec& spec, const TemplateManifest& manifest,
                                   const QueryParams& params, std::uint64_t option_seed) {
  if (!tmpl.applies_to(scene.sport)) return {std::nullopt, "template does not apply to this sport"};
  const DerivedAnswer ans = derive_answer(scene, spec, tmpl.type, params);
  if (ans.ambiguous) return {std::nullopt, "ambiguous"};

  QAItem item;
  item.scene_id = scene.scene_id;
  item.frame_id = scene.frame_id;
  item.sport = scene.sport;
  item.subcategory = subcategory_of(tmpl.type);
  item.category = category_of(item.subcategory);
  item.answer_type = answer_type_of(tmpl.type);

  auto& meta = item.meta;
  meta.template_id = tmpl.id;
  meta.rng_seed = option_seed;
  meta.question_type = tmpl.type;
  if (params.a) meta.entities.push_back(to_string(*params.a));
  if (params.b) meta.entities.push_back(to_string(*params.b));
  meta.line = params.line;
  meta.margin = ans.margin;
  meta.distances = ans.distances;
  for (const auto& p : scene.players) meta.player_labels[p.player_id] = p.label;
  if (tmpl.type == QuestionType::ball_visible) meta.flags.push_back("visibility_from_annotation");

  std::string question = fill(tmpl.text, placeholder_values(tmpl.type, params, spec));
  if (tmpl.type == QuestionType::localization) question = localization_preamble(spec) + " " + question;

  if (item.answer_type == AnswerType::mcq) {
    const auto& key = std::get<std::string>(ans.value);
    meta.answer_key = key;
    std::vector<OptionChoice> choices;
    std::mt19937_64 rng(option_seed);
    if (uses_player_options(tmpl.type)) {
      std::vector<int> distractors;
      for (int label : ans.candidates)
        if (player_key(label) != key) distractors.push_back(label);
      shuffle(distractors, rng);
      if (distractors.size() > 3) distractors.resize(3);
      choices.push_back({key, option_text_for_player(parse_entity(key).player)});
      for (int label : distractors) choices.push_back({player_key(label), option_text_for_player(label)});
      shuffle(choices, rng);
    } else {
      // Fixed option sets keep their printed order.
      choices = manifest.options(tmpl.option_set);
    }
    bool found = false;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      item.options.push_back({letter_of(i), choices[i].text, choices[i].key});
      if (choices[i].key == key) {
        item.ground_truth = letter_of(i);
        found = true;
      }
    }
    if (!found)
      throw Error(ErrorCode::invalid_argument,
                  "template " + tmpl.id + ": answer '" + key + "' is not among its options");
  } else {
    std::visit([&](const auto& v) { item.ground_truth = v; }, ans.value);
  }

  std::string text = pre_prompt(spec);
  text += "\n";
  text += question;
  for (const auto& o : item.options) text += "\n(" + o.letter + ")" + o.text;
  text += "\n";
  text += post_prompt(item.answer_type);
  item.question_text = std::move(text);

  add_ratio(item, scene, spec);
  return {std::move(item), {}};
}

InstantiateResult instantiate(const QuestionTemplate& tmpl, const SceneState& scene,
                              const CourtSpec& spec, const TemplateManifest& manifest,
                              std::uint64_t rng_seed) {
  if (!tmpl.applies_to(scene.sport)) return {std::nullopt, "template does not apply to this sport"};
  std::mt19937_64 rng(rng_seed);
  const Binding b = bind(tmpl.type, scene, spec, rng);
  if (!b.params) return {std::nullopt, b.skip_reason};
  auto r = instantiate_with(tmpl, scene, spec, manifest, *b.params, rng_seed);
  return r;
}

double ambiguity_ratio(const QAItem& item, const SceneState& scene, const CourtSpec& spec) {
  const auto& m = item.meta;
  auto pixel_of = [&](const Vec3& p) {
    const auto pr = project(scene.camera, p);
    if (pr.behind) throw Error(ErrorCode::behind_camera, "entity projects behind the camera");
    return pr.pixel;
  };
  double d3 = 0.0;
  double d2 = 0.0;
  if (item.subcategory == Subcategory::object_object) {
    if (m.entities.size() != 2) throw Error(ErrorCode::invalid_argument, "object pair missing");
    const Vec3 a = entity_position(scene, parse_entity(m.entities[0]));
    const Vec3 b = entity_position(scene, parse_entity(m.entities[1]));
    d3 = (a - b).norm();
    d2 = (pixel_of(a) - pixel_of(b)).norm();
  } else if (item.subcategory == Subcategory::object_line) {
    if (m.entities.size() != 1 || m.line.empty())
      throw Error(ErrorCode::invalid_argument, "object or line missing");
    const Vec3 a = entity_position(scene, parse_entity(m.entities[0]));
    const auto& seg = spec.line(m.line).segment;
    const double z = spec.surface_height_m;
    d3 = line_distance(a, m.line, spec);
    const ImageSegment img{pixel_of(Vec3(seg.a.x(), seg.a.y(), z)),
                           pixel_of(Vec3(seg.b.x(), seg.b.y(), z)), false};
    d2 = point_segment_distance(pixel_of(a), img);
  } else {
    throw Error(ErrorCode::invalid_argument,
                "ratio is defined for object-object and object-line items only");
  }
  if (d2 == 0.0) return std::numeric_limits<double>::infinity();
  return d3 / d2;
}

int DistributionTargets::total() const {
  int n = 0;
  for (const auto& [s, per] : counts)
    for (const auto& [sport, c] : per) n += c;
  return n;
}

int DistributionTargets::get(Subcategory s, Sport sport) const {
  auto it = counts.find(s);
  if (it == counts.end()) return 0;
  auto jt = it->second.find(sport);
  return jt == it->second.end() ? 0 : jt->second;
}

DistributionTargets DistributionTargets::bench() {
  // badminton, tennis, table tennis
  static constexpr int kCounts[kSubcategoryCount][3] = {
      {77, 99, 101},  {54, 85, 90},   {78, 140, 99},   {168, 273, 222}, {7, 12, 9},
      {8, 11, 15},    {115, 146, 107}, {66, 82, 107},  {72, 120, 105},  {63, 107, 78},
      {42, 40, 0},    {174, 111, 108}, {160, 198, 137}};
  DistributionTargets t;
  for (std::size_t i = 0; i < kSubcategoryCount; ++i)
    for (std::size_t k = 0; k < kBenchSports.size(); ++k)
      t.counts[kAllSubcategories[i]][kBenchSports[k]] = kCounts[i][k];
  return t;
}

int DatasetManifest::total() const {
  int n = 0;
  for (const auto& [s, per] : achieved)
    for (const auto& [sport, c] : per) n += c;
  return n;
}

int DatasetManifest::shortfall(Subcategory s, Sport sport) const {
  auto get = [&](const auto& table) {
    auto it = table.find(s);
    if (it == table.end()) return 0;
    auto jt = it->second.find(sport);
    return jt == it->second.end() ? 0 : jt->second;
  };
  return std::max(0, get(targets) - get(achieved));
}

namespace {

struct Candidate {
  std::size_t scene;
  std::size_t tmpl;
  std::uint64_t seed;
};

std::uint64_t scene_seed(std::uint64_t global, const SceneState& s) {
  return mix_seed(global, fnv1a64(s.scene_id + "/" + s.frame_id));
}

}  // namespace

GeneratedDataset generate_dataset(std::span<const SceneState> scenes,
                                  const DistributionTargets& targets, const GenerateOptions& options,
                                  const CourtRegistry& registry, const TemplateManifest& manifest) {
  if (scenes.empty()) throw Error(ErrorCode::empty_input, "empty scene pool");

  // Pass 1: which (scene, template) pairs yield an unambiguous item.
  std::vector<std::vector<Candidate>> per_scene(scenes.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < scenes.size(); i += step) {
      const auto& scene = scenes[i];
      const auto& spec = registry.get(scene.sport);
      const std::uint64_t base = scene_seed(options.seed, scene);
      for (std::size_t t = 0; t < manifest.templates.size(); ++t) {
        const auto& tmpl = manifest.templates[t];
        if (targets.get(subcategory_of(tmpl.type), scene.sport) <= 0) continue;
        if (!tmpl.applies_to(scene.sport)) continue;
        const std::uint64_t seed = mix_seed(base, fnv1a64(tmpl.id));
        std::mt19937_64 rng(seed);
        const Binding b = bind(tmpl.type, scene, spec, rng);
        if (!b.params) continue;
        if (derive_answer(scene, spec, tmpl.type, *b.params).ambiguous) continue;
        per_scene[i].push_back({i, t, seed});
      }
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work, k, threads);
    for (auto& th : pool) th.join();
  }

  // Pass 2: bucket, shuffle, cut.
  std::map<std::pair<Subcategory, Sport>, std::vector<Candidate>> buckets;
  for (const auto& list : per_scene)
    for (const auto& c : list)
      buckets[{subcategory_of(manifest.templates[c.tmpl].type), scenes[c.scene].sport}].push_back(c);

  std::vector<Candidate> chosen;
  for (auto& [key, list] : buckets) {
    const int want = targets.get(key.first, key.second);
    std::mt19937_64 rng(mix_seed(options.seed, fnv1a64(std::string(to_string(key.first)) + "/" +
                                                        std::string(to_string(key.second)))));
    shuffle(list, rng);
    if (static_cast<int>(list.size()) > want) list.resize(static_cast<std::size_t>(want));
    chosen.insert(chosen.end(), list.begin(), list.end());
  }

  GeneratedDataset out;
  out.items.reserve(chosen.size());
  for (const auto& c : chosen) {
    const auto& scene = scenes[c.scene];
    auto r = instantiate(manifest.templates[c.tmpl], scene, registry.get(scene.sport), manifest, c.seed);
    if (!r.item) throw Error(ErrorCode::invalid_argument, "planned item failed: " + r.skip_reason);
    out.items.push_back(std::move(*r.item));
  }
  std::stable_sort(out.items.begin(), out.items.end(), [](const QAItem& a, const QAItem& b) {
    return std::tie(a.subcategory, a.sport, a.scene_id, a.frame_id, a.meta.template_id) <
           std::tie(b.subcategory, b.sport, b.scene_id, b.frame_id, b.meta.template_id);
  });
  char buf[32];
  for (std::size_t i = 0; i < out.items.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%06zu", i + 1);
    out.items[i].id = options.split + "-" + buf;
  }

  auto& m = out.manifest;
  m.split = options.split;
  m.seed = options.seed;
  m.targets = targets.counts;
  m.split_rule = options.split_rule;
  m.pool_scenes = scenes.size();
  m.template_count = manifest.templates.size();
  for (const auto& item : out.items) ++m.achieved[item.subcategory][item.sport];
  for (const auto& [s, per] : targets.counts)
    for (const auto& [sport, c] : per) m.achieved[s][sport] += 0;
  std::set<std::string> ids;
  for (const auto& s : scenes) ids.insert(s.scene_id);
  m.scene_ids.assign(ids.begin(), ids.end());
  return out;
}

SceneSplit split_scenes(std::span<const std::string> scene_ids, double bench_fraction,
                        std::uint64_t seed) {
  if (!(bench_fraction >= 0.0 && bench_fraction <= 1.0))
    throw Error(ErrorCode::invalid_argument, "bench fraction must lie in [0, 1]");
  std::set<std::string> unique(scene_ids.begin(), scene_ids.end());
  SceneSplit s;
  const double cut = bench_fraction * 18446744073709551616.0;  // 2^64
  for (const auto& id : unique) {
    const auto h = mix_seed(seed, fnv1a64(id));
    (static_cast<double>(h) < cut ? s.bench : s.train).push_back(id);
  }
  std::ostringstream rule;
  rule << "scene-level hash split: bench iff mix(seed=" << seed << ", fnv1a64(scene_id)) < "
       << bench_fraction << " * 2^64";
  s.rule = rule.str();
  return s;
}

std::size_t template_cross_product(const TemplateManifest& manifest, const CourtRegistry& registry,
                                   std::span<const Sport> sports, int max_players) {
  const std::size_t P = static_cast<std::size_t>(std::max(0, max_players));
  const std::size_t J = kQuestionJoints.size();
  const std::size_t objects = 1 + P + P * J;
  const std::size_t object_pairs = objects * objects - 1 - P * (1 + J) * (1 + J);
  std::size_t total = 0;
  for (const auto& tmpl : manifest.templates) {
    for (Sport sport : sports) {
      if (!tmpl.applies_to(sport)) continue;
      const auto& spec = registry.get(sport);
      std::size_t n = 1;
      const auto names = placeholders_in(tmpl.text);
      auto has = [&](std::string_view name) {
        return std::find(names.begin(), names.end(), name) != names.end();
      };
      if (has("object")) n *= objects;
      if (has("object1")) n *= object_pairs;
      if (has("line")) n *= spec.lines.size();
      if (has("player")) n *= P;
      if (has("player1")) n *= P * (P - 1);
      total += n;
    }
  }
  return total;
}

}  // namespace courtlab
