#include "lfforge/config.hpp"
#include "lfforge/json_schema.hpp"

#include <doctest.h>

using namespace lfforge;
using nlohmann::json;

namespace {

std::string error_path(const json& doc) {
  try {
    config::from_json(doc, "/tmp");
  } catch (const config::SchemaError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("schema validator keywords") {
  const json schema = json::parse(R"({
    "type": "object", "required": ["a"], "additionalProperties": false,
    "properties": {
      "a": {"type": "integer", "minimum": 1},
      "b": {"type": "array", "items": {"$ref": "#/$defs/s"}, "maxItems": 2},
      "c": {"oneOf": [{"type": "null"}, {"type": "number", "exclusiveMinimum": 0}]}
    },
    "$defs": {"s": {"type": "string", "enum": ["x", "y"]}}
  })");
  CHECK(schema::validate(json::parse(R"({"a": 2, "b": ["x"], "c": null})"), schema).empty());
  auto v = schema::validate(json::parse(R"({"a": 0})"), schema);
  REQUIRE(v.size() == 1);
  CHECK(v[0].path == "/a");
  v = schema::validate(json::parse(R"({"a": 1.5, "b": ["x", "z"], "d": 1})"), schema);
  CHECK(v.size() == 3);
  CHECK(schema::validate(json::parse(R"({"b": []})"), schema)[0].path == "/a");  // missing member
  CHECK(schema::validate(json::parse(R"({"a": 1, "c": 0})"), schema).size() == 1);
  CHECK(schema::validate(json::parse(R"({"a": 1, "b": ["x", "y", "x"]})"), schema)[0].path == "/b");
}

TEST_CASE("an empty document takes every default") {
  const auto c = config::from_json(json::object(), "/base");
  CHECK(c.dt == 0.5);
  CHECK(c.output_dir == "/base/out");
  CHECK(c.preset == "approach4");
  CHECK(c.stages.size() == 3);
  CHECK(c.eval.k == 5);
  CHECK(c.synth.counts.size() == 6);
  CHECK_FALSE(c.ingest_source);
}

TEST_CASE("errors carry the offending path") {
  CHECK(error_path(json{{"dt", -1}}) == "/dt");
  CHECK(error_path(json{{"dt", "fast"}}) == "/dt");
  CHECK(error_path(json{{"pairing", {{"max_gap", 30}, {"bogus", 1}}}}) == "/pairing/bogus");
  CHECK(error_path(json{{"filter", {{"preset", "approach9"}}}}) == "/filter/preset");
  CHECK(error_path(json{{"filter", {{"stages", {"stage1", "stage7"}}}}}) == "/filter/stages/1");
  CHECK(error_path(json{{"eval", {{"tau", 0.3}}}}) == "/eval/tau");
  CHECK(error_path(json{{"eval", {{"k", 1}}}}) == "/eval/k");
  CHECK(error_path(json{{"thresholds", {{"per_category", {{"CAR-BUS", json::object()}}}}}}) ==
        "/thresholds/per_category/CAR-BUS");
  CHECK(error_path(json{{"thresholds", {{"defaults", {{"stage1_gate", "SOMETIMES"}}}}}}) ==
        "/thresholds/defaults/stage1_gate");
}

TEST_CASE("per-category thresholds override only what they name") {
  const auto c = config::from_json(
      json{{"thresholds", {{"defaults", {{"far_gap", 25}}}, {"per_category", {{"TW-TW", {{"gap_range_max", 6}}}}}}}},
      "/");
  const auto& tw = c.thresholds.for_category("TW-TW");
  CHECK(tw.gap_range_max == 6);
  CHECK(tw.far_gap == 25);
  CHECK(c.thresholds.for_category("CAR-CAR").gap_range_max == 10);
}

TEST_CASE("config hash depends on content, not key order") {
  const auto a = json::parse(R"({"dt": 0.5, "eval": {"k": 5, "seed": 1}})");
  const auto b = json::parse(R"({"eval": {"seed": 1, "k": 5}, "dt": 0.5})");
  CHECK(config::config_hash(a) == config::config_hash(b));
  CHECK(config::config_hash(a) != config::config_hash(json::parse(R"({"dt": 0.25})")));
  CHECK(config::hex64(config::fnv1a("")) == "cbf29ce484222325");
  CHECK(config::hex64(config::fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("published schemas parse and accept the shipped config") {
  CHECK(config::runconfig_schema().is_object());
  CHECK(config::pair_dossier_schema().is_object());
  CHECK(config::review_decision_schema().is_object());
  CHECK_NOTHROW(config::load(LFFORGE_SOURCE_DIR "/config/default.json"));
  CHECK_THROWS_AS(config::load("/nonexistent/cfg.json"), config::SchemaError);
}
