#pragma once
#include <string>
#include "pg/scene.hpp"

namespace pg {

// Parses the JSON scene schema (see README). Throws std::runtime_error with
// file/position context on parse errors and named-invariant messages on
// validation errors. Mesh `obj` references resolve relative to the scene file.
Scene load_scene(const std::string& path);
Scene parse_scene_text(const std::string& text, const std::string& base_dir);

std::string serialize_scene(const Scene& scene);
void save_scene(const Scene& scene, const std::string& path);

// Minimal OBJ subset: `v x y z` and triangulated `f a b c` lines only.
// Appends triangles to the scene, tagged with the given surface index.
void load_obj(Scene& scene, int surface_id, const std::string& path);

}  // namespace pg
