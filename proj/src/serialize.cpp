#include "pd/serialize.hpp"

#include <fstream>

namespace pd {

namespace {

double require_number(const Json& j, const char* field) {
  if (!j.contains(field)) {
    throw IoError(std::string("missing field \"") + field + "\"");
  }
  if (!j.at(field).is_number()) {
    throw IoError(std::string("field \"") + field + "\" is not a number");
  }
  return j.at(field).get<double>();
}

}  // namespace

void to_json(Json& j, const CameraIntrinsics& k) {
  j = Json{{"f", k.f},
           {"cx", k.cx},
           {"cy", k.cy},
           {"width", k.width},
           {"height", k.height}};
}

void from_json(const Json& j, CameraIntrinsics& k) {
  k.f = require_number(j, "f");
  k.cx = require_number(j, "cx");
  k.cy = require_number(j, "cy");
  k.width = require_number(j, "width");
  k.height = require_number(j, "height");
}

void to_json(Json& j, const WeakPerspective& w) {
  j = Json{{"s", w.s}, {"tx", w.tx}, {"ty", w.ty}};
}

void from_json(const Json& j, WeakPerspective& w) {
  w.s = require_number(j, "s");
  w.tx = require_number(j, "tx");
  w.ty = require_number(j, "ty");
}

void to_json(Json& j, const Translation& t) {
  j = Json{{"Tx", t.Tx}, {"Ty", t.Ty}, {"Tz", t.Tz}};
}

void from_json(const Json& j, Translation& t) {
  t.Tx = require_number(j, "Tx");
  t.Ty = require_number(j, "Ty");
  t.Tz = require_number(j, "Tz");
}

void to_json(Json& j, const CropBox& b) {
  j = Json{{"cx", b.cx}, {"cy", b.cy}, {"w", b.w},
           {"h", b.h},   {"W", b.W},   {"H", b.H}};
}

void from_json(const Json& j, CropBox& b) {
  b.cx = require_number(j, "cx");
  b.cy = require_number(j, "cy");
  b.w = require_number(j, "w");
  b.h = require_number(j, "h");
  b.W = require_number(j, "W");
  b.H = require_number(j, "H");
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace pd
