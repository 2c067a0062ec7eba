#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "chopsim/scene.hpp"

namespace chopsim {

namespace {

using nlohmann::json;

double round6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
    json objects = json::array();
    for (const SceneObject& o : scene.objects) {
        json verts = json::array();
        for (const Point2& v : o.shape.vertices()) verts.push_back({round6(v.x), round6(v.y)});
        objects.push_back({{"id", o.id},
                           {"class", std::string(to_string(o.food_class))},
                           {"size_fraction", o.size_fraction.value()},
                           {"vertices_mm", std::move(verts)},
                           {"parent_id", o.parent_id ? json(*o.parent_id) : json(nullptr)}});
    }
    const json doc{{"board", {{"width_mm", round6(scene.board.width)},
                              {"height_mm", round6(scene.board.height)}}},
                   {"objects", std::move(objects)}};
    return doc.dump(2) + "\n";
}

Scene scene_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scene file is not valid JSON: ") + e.what());
    }
    try {
        Scene scene;
        scene.board.width = doc.at("board").at("width_mm").get<double>();
        scene.board.height = doc.at("board").at("height_mm").get<double>();
        if (!(scene.board.width > 0.0) || !(scene.board.height > 0.0)) {
            throw std::invalid_argument("board dimensions must be positive");
        }
        int max_id = 0;
        for (const json& o : doc.at("objects")) {
            const auto cls = parse_food_class(o.at("class").get<std::string>());
            if (!cls) throw std::invalid_argument("unknown class " + o.at("class").dump());
            const double frac = o.at("size_fraction").get<double>();
            if (!(frac > 0.0) || frac > 1.0) throw std::invalid_argument("size_fraction must be in (0, 1]");
            const auto denom = static_cast<std::uint32_t>(std::llround(1.0 / frac));
            std::vector<Point2> verts;
            for (const json& v : o.at("vertices_mm")) verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            std::optional<int> parent;
            if (o.contains("parent_id") && !o.at("parent_id").is_null()) parent = o.at("parent_id").get<int>();
            const int id = o.at("id").get<int>();
            if (scene.find(id) != nullptr) throw std::invalid_argument("duplicate object id " + std::to_string(id));
            scene.objects.push_back({id, *cls, {denom}, Polygon(std::move(verts)), parent});
            max_id = std::max(max_id, id);
        }
        scene.next_id = max_id + 1;
        return scene;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed scene file: ") + e.what());
    }
}

}  // namespace chopsim
