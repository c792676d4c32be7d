#pragma once

// Offline scene analysis: consumes one detection/segmentation log (a JSON
// frame) plus a guidance response. Computes pinhole distances, flags risky
// pedestrians via the direct-lane overlap test, and assigns rule-guided
// attention labels to detected objects. No model inference happens here.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stag/common.hpp"
#include "stag/guidance.hpp"

namespace stag {

enum class ObjectClass { Pedestrian, Car, Suv, Van, Other };
enum class TravelDirection { Same, Opposite, Crossing, Stationary, Unknown };
enum class AreaTag { DirectLane, AlternativeLane, Roadside, OffTrafficway, Unknown };

inline const char* to_string(ObjectClass c) {
    switch (c) {
        case ObjectClass::Pedestrian: return "pedestrian";
        case ObjectClass::Car: return "car";
        case ObjectClass::Suv: return "SUV";
        case ObjectClass::Van: return "van";
        case ObjectClass::Other: return "other";
    }
    return "other";
}

struct PixelBox {
    double x = 0;  // left
    double y = 0;  // top
    double w = 0;
    double h = 0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double center_x() const { return x + w / 2; }
    double center_y() const { return y + h / 2; }

    bool overlaps(const PixelBox& o) const {
        return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
    }
};

struct DetectedObject {
    ObjectClass cls = ObjectClass::Other;
    PixelBox box;
    TravelDirection direction = TravelDirection::Unknown;
    AreaTag area = AreaTag::Unknown;
};

struct SceneFrame {
    int width = 0;
    int height = 0;
    std::string time_iso;
    SparseFlags flags;
    std::optional<int> func_sys, rel_road, reljct2, typ_int;
    std::vector<std::array<double, 2>> direct_lane;  // polygon vertices
    std::vector<DetectedObject> objects;
};

struct Calibration {
    double focal_inches = 2.5;
    double pixel_scale = 102.0;  // pixels per inch on the sensor
    double van_height_ft = 7.0;
    double suv_height_ft = 6.0;
    double car_height_ft = 4.7;
    double pedestrian_height_ft = 5.6;
    double risk_distance_ft = 10.0;
    // 4x4 region-of-interest mask (row, col), row 0 at the top. The default
    // keeps the bottom-center cells that contain the travel path.
    std::set<std::pair<int, int>> roi_cells{{2, 1}, {2, 2}, {3, 1}, {3, 2}};

    std::optional<double> true_height_ft(ObjectClass c) const {
        switch (c) {
            case ObjectClass::Van: return van_height_ft;
            case ObjectClass::Suv: return suv_height_ft;
            case ObjectClass::Car: return car_height_ft;
            case ObjectClass::Pedestrian: return pedestrian_height_ft;
            case ObjectClass::Other: return std::nullopt;
        }
        return std::nullopt;
    }
};

// Similar triangles: distance = (F * pixel_scale) * H / h, with the focal
// length converted to pixels so the image height h can stay in pixels.
inline std::optional<double> estimate_distance(const DetectedObject& obj, const Calibration& c) {
    auto H = c.true_height_ft(obj.cls);
    if (!H || obj.box.h <= 0) return std::nullopt;
    return c.focal_inches * c.pixel_scale * (*H) / obj.box.h;
}

// Axis-aligned rectangle over the most outside coordinates of the segment.
inline PixelBox lane_bounding_rectangle(std::span<const std::array<double, 2>> polygon) {
    if (polygon.size() < 3) throw DataError("direct-lane polygon needs at least 3 vertices");
    double min_x = polygon[0][0], max_x = polygon[0][0];
    double min_y = polygon[0][1], max_y = polygon[0][1];
    for (const auto& v : polygon) {
        min_x = std::min(min_x, v[0]);
        max_x = std::max(max_x, v[0]);
        min_y = std::min(min_y, v[1]);
        max_y = std::max(max_y, v[1]);
    }
    if (min_x == max_x || min_y == max_y) throw DataError("direct-lane polygon is degenerate");
    return {min_x, min_y, max_x - min_x, max_y - min_y};
}

struct PedestrianFlag {
    int object_index = 0;
    bool lane_overlap = false;
    std::optional<double> distance_ft;
    bool risky = false;  // overlap and within the distance threshold
};

inline std::vector<PedestrianFlag> flag_risky_pedestrians(const SceneFrame& frame,
                                                          const Calibration& calib) {
    PixelBox lane = lane_bounding_rectangle(frame.direct_lane);
    std::vector<PedestrianFlag> flags;
    for (size_t i = 0; i < frame.objects.size(); ++i) {
        const DetectedObject& obj = frame.objects[i];
        if (obj.cls != ObjectClass::Pedestrian) continue;
        PedestrianFlag f;
        f.object_index = int(i);
        f.lane_overlap = obj.box.overlaps(lane);
        f.distance_ft = estimate_distance(obj, calib);
        f.risky = f.lane_overlap && f.distance_ft && *f.distance_ft < calib.risk_distance_ft;
        flags.push_back(f);
    }
    return flags;
}

inline bool in_roi(const PixelBox& box, int width, int height, const Calibration& calib) {
    if (width <= 0 || height <= 0) return false;
    int col = std::clamp(int(box.center_x() * 4.0 / width), 0, 3);
    int row = std::clamp(int(box.center_y() * 4.0 / height), 0, 3);
    return calib.roi_cells.count({row, col}) > 0;
}

struct ObjectAnnotation {
    int index = 0;
    ObjectClass cls = ObjectClass::Other;
    bool attended = false;
    bool in_roi = false;
    std::optional<double> distance_ft;
    std::optional<bool> risky;  // pedestrians only
    std::string rationale;
};

struct AnnotatedScene {
    PixelBox lane_rect;
    std::vector<ObjectAnnotation> objects;
};

namespace detail {

// Rule-to-object mapping table. The pedestrian FHE code maps to risky
// pedestrians; each MC code lists the travel direction and lane placement
// a vehicle must have for the rule to direct attention to it.
inline constexpr int kPedestrianFheCode = 8;

struct McMapping {
    int mc_code;
    TravelDirection direction;
    bool lane_area_only;  // restrict to direct/alternative lane areas
};

inline const std::vector<McMapping>& mc_mappings() {
    static const std::vector<McMapping> m = {
        {1, TravelDirection::Same, true},      // Front-to-Rear: vehicle ahead, same direction
        {7, TravelDirection::Same, true},      // Sideswipe Same Direction
        {6, TravelDirection::Crossing, false}, // Angle: crossing vehicle
        {2, TravelDirection::Opposite, true},  // Front-to-Front: oncoming vehicle ahead
    };
    return m;
}

inline bool lane_area(AreaTag a) { return a == AreaTag::DirectLane || a == AreaTag::AlternativeLane; }

}  // namespace detail

// Labels every object. Pedestrian-FHE rules attend risky pedestrians;
// MC rules attend vehicles whose travel direction and placement match the
// collision geometry and that sit inside the region of interest. Objects
// matched by no retained rule are de-emphasized with the reason recorded.
inline AnnotatedScene apply_attention(const SceneFrame& frame, const GuidanceResponse& guidance,
                                      const Calibration& calib) {
    AnnotatedScene out;
    if (frame.objects.empty() && frame.direct_lane.size() < 3) return out;
    out.lane_rect = lane_bounding_rectangle(frame.direct_lane);

    bool pedestrian_rule = false;
    std::vector<int> mc_rule_codes;
    for (const auto& r : guidance.rules) {
        if (r.kind == RuleKind::Fhe && r.type_code == detail::kPedestrianFheCode) {
            pedestrian_rule = true;
        }
        if (r.kind == RuleKind::Mc) mc_rule_codes.push_back(r.type_code);
    }

    auto ped_flags = flag_risky_pedestrians(frame, calib);
    auto flag_for = [&](int index) -> const PedestrianFlag* {
        for (const auto& f : ped_flags) {
            if (f.object_index == index) return &f;
        }
        return nullptr;
    };

    for (size_t i = 0; i < frame.objects.size(); ++i) {
        const DetectedObject& obj = frame.objects[i];
        ObjectAnnotation a;
        a.index = int(i);
        a.cls = obj.cls;
        a.distance_ft = estimate_distance(obj, calib);
        a.in_roi = in_roi(obj.box, frame.width, frame.height, calib);

        if (guidance.rules.empty()) {
            a.rationale = "no rule retained for this context";
            out.objects.push_back(std::move(a));
            continue;
        }

        if (obj.cls == ObjectClass::Pedestrian) {
            const PedestrianFlag* f = flag_for(int(i));
            a.risky = f && f->risky;
            if (!pedestrian_rule) {
                a.rationale = "no pedestrian rule for this context";
            } else if (f && f->risky) {
                a.attended = true;
                a.rationale = "pedestrian rule: on the direct lane within " +
                              std::to_string(int(calib.risk_distance_ft)) + " ft";
            } else if (f && f->lane_overlap) {
                a.rationale = "pedestrian overlaps the direct lane but is beyond the distance threshold";
            } else {
                a.rationale = "pedestrian rule present but pedestrian is off the direct lane";
            }
        } else if (obj.cls == ObjectClass::Other) {
            a.rationale = "object class has no rule mapping";
        } else {
            // vehicle classes
            std::string why_not;
            for (const auto& m : detail::mc_mappings()) {
                if (std::find(mc_rule_codes.begin(), mc_rule_codes.end(), m.mc_code) ==
                    mc_rule_codes.end()) {
                    continue;
                }
                if (obj.direction != m.direction) {
                    why_not = "travel direction does not match the collision rule";
                    continue;
                }
                if (m.lane_area_only && !detail::lane_area(obj.area)) {
                    why_not = "vehicle is outside the trafficway lanes";
                    continue;
                }
                if (!a.in_roi) {
                    why_not = "vehicle is outside the region of interest";
                    continue;
                }
                a.attended = true;
                break;
            }
            if (a.attended) {
                // name the first matching rule for the audit trail
                for (const auto& r : guidance.rules) {
                    if (r.kind != RuleKind::Mc) continue;
                    bool matched = false;
                    for (const auto& m : detail::mc_mappings()) {
                        if (m.mc_code == r.type_code && obj.direction == m.direction &&
                            (!m.lane_area_only || detail::lane_area(obj.area))) {
                            matched = true;
                            break;
                        }
                    }
                    if (matched) {
                        a.rationale = "collision rule '" + r.type_label +
                                      "' matches this vehicle's direction and placement";
                        break;
                    }
                }
            } else if (mc_rule_codes.empty()) {
                a.rationale = "no collision rule for this context";
            } else if (!why_not.empty()) {
                a.rationale = why_not;
            } else {
                a.rationale = "no collision rule matches this vehicle";
            }
        }
        out.objects.push_back(std::move(a));
    }
    return out;
}

// --- frame JSON ------------------------------------------------------------

namespace detail {

inline ObjectClass object_class_from_string(const std::string& s) {
    if (s == "pedestrian") return ObjectClass::Pedestrian;
    if (s == "car") return ObjectClass::Car;
    if (s == "SUV" || s == "suv") return ObjectClass::Suv;
    if (s == "van") return ObjectClass::Van;
    return ObjectClass::Other;
}

inline TravelDirection direction_from_string(const std::string& s) {
    if (s == "same") return TravelDirection::Same;
    if (s == "opposite") return TravelDirection::Opposite;
    if (s == "crossing") return TravelDirection::Crossing;
    if (s == "stationary") return TravelDirection::Stationary;
    return TravelDirection::Unknown;
}

inline const char* direction_to_string(TravelDirection d) {
    switch (d) {
        case TravelDirection::Same: return "same";
        case TravelDirection::Opposite: return "opposite";
        case TravelDirection::Crossing: return "crossing";
        case TravelDirection::Stationary: return "stationary";
        case TravelDirection::Unknown: return "unknown";
    }
    return "unknown";
}

inline AreaTag area_from_string(const std::string& s) {
    if (s == "direct_lane") return AreaTag::DirectLane;
    if (s == "alternative_lane") return AreaTag::AlternativeLane;
    if (s == "roadside") return AreaTag::Roadside;
    if (s == "off_trafficway") return AreaTag::OffTrafficway;
    return AreaTag::Unknown;
}

inline const char* area_to_string(AreaTag a) {
    switch (a) {
        case AreaTag::DirectLane: return "direct_lane";
        case AreaTag::AlternativeLane: return "alternative_lane";
        case AreaTag::Roadside: return "roadside";
        case AreaTag::OffTrafficway: return "off_trafficway";
        case AreaTag::Unknown: return "unknown";
    }
    return "unknown";
}

}  // namespace detail

inline SceneFrame parse_scene_frame(const nlohmann::json& j) {
    if (j.value("schema", "") != "scene_frame" || j.value("version", 0) != 1) {
        throw DataError("scene frame: unrecognized schema/version");
    }
    SceneFrame f;
    f.width = j.at("image").at("width").get<int>();
    f.height = j.at("image").at("height").get<int>();
    if (f.width <= 0 || f.height <= 0) throw DataError("scene frame: bad image dimensions");
    f.time_iso = j.at("time").get<std::string>();
    if (j.contains("scenario_flags")) {
        const auto& s = j.at("scenario_flags");
        f.flags.sch_bus = s.value("sch_bus", false);
        f.flags.work_zone = s.value("work_zone", false);
        f.flags.within_interchange = s.value("within_interchange", false);
        f.flags.crash_factor = s.value("crash_factor", false);
        f.flags.bad_weather = s.value("bad_weather", false);
    }
    if (j.contains("location")) {
        const auto& l = j.at("location");
        auto opt = [&](const char* key) -> std::optional<int> {
            if (!l.contains(key) || l.at(key).is_null()) return std::nullopt;
            return l.at(key).get<int>();
        };
        f.func_sys = opt("func_sys");
        f.rel_road = opt("rel_road");
        f.reljct2 = opt("reljct2");
        f.typ_int = opt("typ_int");
    }
    for (const auto& v : j.at("direct_lane")) {
        f.direct_lane.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    lane_bounding_rectangle(f.direct_lane);  // enforces a usable polygon
    for (const auto& oj : j.at("objects")) {
        DetectedObject o;
        o.cls = detail::object_class_from_string(oj.at("class").get<std::string>());
        const auto& b = oj.at("box");
        o.box = {b.at("x").get<double>(), b.at("y").get<double>(), b.at("w").get<double>(),
                 b.at("h").get<double>()};
        if (o.box.w <= 0 || o.box.h <= 0 || o.box.x < 0 || o.box.y < 0 ||
            o.box.right() > f.width || o.box.bottom() > f.height) {
            throw DataError("scene frame: object box outside image bounds");
        }
        o.direction = detail::direction_from_string(oj.value("direction", "unknown"));
        o.area = detail::area_from_string(oj.value("area", "unknown"));
        f.objects.push_back(o);
    }
    return f;
}

inline nlohmann::ordered_json annotated_scene_to_json(const SceneFrame& frame,
                                                      const GuidanceResponse& guidance,
                                                      const AnnotatedScene& scene) {
    nlohmann::ordered_json j;
    j["schema"] = "scene_annotation";
    j["version"] = 1;
    nlohmann::ordered_json ctx;
    ctx["scenario"] = guidance.scenario_id;
    ctx["cluster"] = guidance.cluster_id ? nlohmann::ordered_json(*guidance.cluster_id)
                                         : nlohmann::ordered_json(nullptr);
    ctx["day_class"] = to_string(guidance.day_class);
    ctx["support_time"] = guidance.support_time;
    j["context"] = ctx;
    j["lane_rect"] = {{"x", scene.lane_rect.x},
                      {"y", scene.lane_rect.y},
                      {"w", scene.lane_rect.w},
                      {"h", scene.lane_rect.h}};
    auto objects = nlohmann::ordered_json::array();
    for (const auto& a : scene.objects) {
        nlohmann::ordered_json oj;
        oj["index"] = a.index;
        oj["class"] = to_string(a.cls);
        const DetectedObject& src = frame.objects[a.index];
        oj["direction"] = detail::direction_to_string(src.direction);
        oj["area"] = detail::area_to_string(src.area);
        oj["attended"] = a.attended;
        oj["in_roi"] = a.in_roi;
        oj["distance_ft"] =
            a.distance_ft ? nlohmann::ordered_json(*a.distance_ft) : nlohmann::ordered_json(nullptr);
        oj["risky"] = a.risky ? nlohmann::ordered_json(*a.risky) : nlohmann::ordered_json(nullptr);
        oj["rationale"] = a.rationale;
        objects.push_back(oj);
    }
    j["objects"] = objects;
    return j;
}

}  // namespace stag
