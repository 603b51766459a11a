#include "pg/scene_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pg {

using nlohmann::json;

namespace {

Vec3 parse_vec3(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw std::runtime_error(std::string("scene: ") + what + " must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

RGB parse_rgb(const json& j, const char* what) {
    Vec3 v = parse_vec3(j, what);
    return {v.x, v.y, v.z};
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json rgb_json(const RGB& c) { return json::array({c.r, c.g, c.b}); }

std::string dir_of(const std::string& path) {
    size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

int material_index(const Scene& scene, const std::string& name) {
    for (size_t i = 0; i < scene.materials.size(); ++i)
        if (scene.materials[i].name == name) return static_cast<int>(i);
    throw std::runtime_error("scene: surface references unknown material '" + name + "'");
}

void validate(const Scene& scene) {
    if (scene.lights.empty())
        throw std::runtime_error("scene validation: violated invariant 'at least one light'");
    bool receiver = false;
    for (const auto& s : scene.surfaces) receiver = receiver || s.receiver;
    if (!receiver)
        throw std::runtime_error("scene validation: violated invariant 'at least one receiver'");
    for (const auto& s : scene.surfaces) {
        if (s.material < 0 || s.material >= static_cast<int>(scene.materials.size()))
            throw std::runtime_error("scene validation: surface material index out of range");
        if (s.kind == Surface::kSphere && s.radius <= 0)
            throw std::runtime_error("scene validation: sphere radius must be positive");
        if (s.kind == Surface::kTriMesh && s.tri_begin == s.tri_end)
            throw std::runtime_error("scene validation: tri_mesh has no triangles");
    }
    for (const auto& l : scene.lights) {
        if (l.kind == Light::kRectArea && l.rect_area() <= 0)
            throw std::runtime_error("scene validation: rect_area light has degenerate edges");
        if (l.kind == Light::kDirectional && length(l.direction) == 0)
            throw std::runtime_error("scene validation: directional light needs a direction");
    }
    if (scene.camera.width <= 0 || scene.camera.height <= 0)
        throw std::runtime_error("scene validation: camera resolution must be positive");
}

}  // namespace

void load_obj(Scene& scene, int surface_id, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("obj: cannot open '" + path + "'");
    std::vector<Vec3> vertices;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("obj: " + path + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z)) fail("malformed vertex");
            vertices.push_back(v);
        } else if (tag == "f") {
            int idx[3];
            std::string ref;
            for (int k = 0; k < 3; ++k) {
                if (!(ls >> ref)) fail("face needs exactly 3 vertices (triangulated input only)");
                // accept a/b/c forms, keep the leading vertex index
                idx[k] = std::stoi(ref.substr(0, ref.find('/')));
                if (idx[k] < 1 || idx[k] > static_cast<int>(vertices.size()))
                    fail("face index out of range");
            }
            std::string extra;
            if (ls >> extra) fail("face needs exactly 3 vertices (triangulated input only)");
            scene.triangles.push_back(
                {vertices[idx[0] - 1], vertices[idx[1] - 1], vertices[idx[2] - 1], surface_id});
        }
        // all other tags (vn, vt, usemtl, ...) are ignored
    }
}

Scene parse_scene_text(const std::string& text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scene parse error: ") + e.what());
    }

    Scene scene;
    if (doc.contains("camera")) {
        const json& c = doc["camera"];
        scene.camera.position = parse_vec3(c.at("position"), "camera.position");
        scene.camera.look_at = parse_vec3(c.at("look_at"), "camera.look_at");
        if (c.contains("up")) scene.camera.up = parse_vec3(c["up"], "camera.up");
        scene.camera.fov_deg = c.value("fov", 45.0);
        if (c.contains("resolution")) {
            scene.camera.width = c["resolution"][0].get<int>();
            scene.camera.height = c["resolution"][1].get<int>();
        }
    }

    for (const json& m : doc.value("materials", json::array())) {
        Material mat;
        mat.name = m.at("name").get<std::string>();
        std::string type = m.at("type").get<std::string>();
        if (type == "diffuse") {
            mat.kind = Material::kDiffuse;
            mat.albedo = parse_rgb(m.at("albedo"), "material.albedo");
        } else if (type == "mirror") {
            mat.kind = Material::kMirror;
        } else if (type == "dielectric") {
            mat.kind = Material::kDielectric;
            mat.ior = m.value("ior", 1.5);
        } else {
            throw std::runtime_error("scene: unknown material type '" + type + "'");
        }
        scene.materials.push_back(mat);
    }

    for (const json& l : doc.value("lights", json::array())) {
        Light light;
        std::string type = l.at("type").get<std::string>();
        if (type == "point") {
            light.kind = Light::kPoint;
            light.position = parse_vec3(l.at("position"), "light.position");
            light.intensity = parse_rgb(l.at("intensity"), "light.intensity");
        } else if (type == "rect_area") {
            light.kind = Light::kRectArea;
            light.corner = parse_vec3(l.at("corner"), "light.corner");
            light.edge_u = parse_vec3(l.at("edge_u"), "light.edge_u");
            light.edge_v = parse_vec3(l.at("edge_v"), "light.edge_v");
            light.radiance = parse_rgb(l.at("radiance"), "light.radiance");
        } else if (type == "directional") {
            light.kind = Light::kDirectional;
            light.direction = parse_vec3(l.at("direction"), "light.direction");
            light.radiance = parse_rgb(l.at("radiance"), "light.radiance");
        } else {
            throw std::runtime_error("scene: unknown light type '" + type + "'");
        }
        scene.lights.push_back(light);
    }

    for (const json& s : doc.value("surfaces", json::array())) {
        Surface surf;
        surf.material = material_index(scene, s.at("material").get<std::string>());
        surf.caster = s.value("caster", false);
        surf.receiver = s.value("receiver", false);
        std::string type = s.at("type").get<std::string>();
        if (type == "sphere") {
            surf.kind = Surface::kSphere;
            surf.center = parse_vec3(s.at("center"), "sphere.center");
            surf.radius = s.at("radius").get<double>();
            scene.surfaces.push_back(surf);
        } else if (type == "tri_mesh") {
            surf.kind = Surface::kTriMesh;
            surf.tri_begin = static_cast<int>(scene.triangles.size());
            int sid = static_cast<int>(scene.surfaces.size());
            if (s.contains("obj")) {
                surf.obj_path = s["obj"].get<std::string>();
                load_obj(scene, sid, base_dir + "/" + surf.obj_path);
            } else {
                std::vector<Vec3> verts;
                for (const json& v : s.at("vertices")) verts.push_back(parse_vec3(v, "vertex"));
                for (const json& f : s.at("faces")) {
                    if (!f.is_array() || f.size() != 3)
                        throw std::runtime_error("scene: faces must be triangles");
                    int a = f[0].get<int>(), b = f[1].get<int>(), c = f[2].get<int>();
                    int n = static_cast<int>(verts.size());
                    if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n)
                        throw std::runtime_error("scene: face index out of range");
                    scene.triangles.push_back({verts[a], verts[b], verts[c], sid});
                }
            }
            surf.tri_end = static_cast<int>(scene.triangles.size());
            scene.surfaces.push_back(surf);
        } else {
            throw std::runtime_error("scene: unknown surface type '" + type + "'");
        }
    }

    validate(scene);
    compute_bounding_sphere(scene);
    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scene: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scene_text(buf.str(), dir_of(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string serialize_scene(const Scene& scene) {
    json doc;
    doc["camera"] = {{"position", vec_json(scene.camera.position)},
                     {"look_at", vec_json(scene.camera.look_at)},
                     {"up", vec_json(scene.camera.up)},
                     {"fov", scene.camera.fov_deg},
                     {"resolution", json::array({scene.camera.width, scene.camera.height})}};

    doc["materials"] = json::array();
    for (const auto& m : scene.materials) {
        json jm{{"name", m.name}};
        switch (m.kind) {
            case Material::kDiffuse:
                jm["type"] = "diffuse";
                jm["albedo"] = rgb_json(m.albedo);
                break;
            case Material::kMirror: jm["type"] = "mirror"; break;
            case Material::kDielectric:
                jm["type"] = "dielectric";
                jm["ior"] = m.ior;
                break;
        }
        doc["materials"].push_back(jm);
    }

    doc["lights"] = json::array();
    for (const auto& l : scene.lights) {
        json jl;
        switch (l.kind) {
            case Light::kPoint:
                jl = {{"type", "point"},
                      {"position", vec_json(l.position)},
                      {"intensity", rgb_json(l.intensity)}};
                break;
            case Light::kRectArea:
                jl = {{"type", "rect_area"},
                      {"corner", vec_json(l.corner)},
                      {"edge_u", vec_json(l.edge_u)},
                      {"edge_v", vec_json(l.edge_v)},
                      {"radiance", rgb_json(l.radiance)}};
                break;
            case Light::kDirectional:
                jl = {{"type", "directional"},
                      {"direction", vec_json(l.direction)},
                      {"radiance", rgb_json(l.radiance)}};
                break;
        }
        doc["lights"].push_back(jl);
    }

    doc["surfaces"] = json::array();
    for (const auto& s : scene.surfaces) {
        json js{{"material", scene.materials[s.material].name},
                {"caster", s.caster},
                {"receiver", s.receiver}};
        if (s.kind == Surface::kSphere) {
            js["type"] = "sphere";
            js["center"] = vec_json(s.center);
            js["radius"] = s.radius;
        } else {
            js["type"] = "tri_mesh";
            if (!s.obj_path.empty()) {
                js["obj"] = s.obj_path;
            } else {
                json verts = json::array(), faces = json::array();
                int base = 0;
                for (int ti = s.tri_begin; ti < s.tri_end; ++ti) {
                    const Triangle& t = scene.triangles[ti];
                    verts.push_back(vec_json(t.a));
                    verts.push_back(vec_json(t.b));
                    verts.push_back(vec_json(t.c));
                    faces.push_back(json::array({base, base + 1, base + 2}));
                    base += 3;
                }
                js["vertices"] = verts;
                js["faces"] = faces;
            }
        }
        doc["surfaces"].push_back(js);
    }
    return doc.dump(2) + "\n";
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("scene: cannot write '" + path + "'");
    out << serialize_scene(scene);
}

}  // namespace pg
