#pragma once

#include <string>

#include <json.hpp>

#include "pd/geometry.hpp"

namespace pd {

using Json = nlohmann::json;

// JSON schemas:
//   CameraIntrinsics {"f":..,"cx":..,"cy":..,"width":..,"height":..}
//   WeakPerspective  {"s":..,"tx":..,"ty":..}
//   Translation      {"Tx":..,"Ty":..,"Tz":..}
//   CropBox          {"cx":..,"cy":..,"w":..,"h":..,"W":..,"H":..}
void to_json(Json& j, const CameraIntrinsics& k);
void from_json(const Json& j, CameraIntrinsics& k);
void to_json(Json& j, const WeakPerspective& w);
void from_json(const Json& j, WeakPerspective& w);
void to_json(Json& j, const Translation& t);
void from_json(const Json& j, Translation& t);
void to_json(Json& j, const CropBox& b);
void from_json(const Json& j, CropBox& b);

/// Parses a JSON file, rethrowing parse/field errors as IoError with the
/// file path (and missing field name, when applicable) in the message.
Json load_json_file(const std::string& path);

void save_json_file(const std::string& path, const Json& j);

}  // namespace pd
