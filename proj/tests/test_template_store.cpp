#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "iatr/error.hpp"
#include "iatr/template_store.hpp"
#include "json.hpp"

using namespace iatr;

namespace {

IntermediateTemplateSet random_store(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // wide exponent range so shortest round-trip rendering is exercised
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  TrainingSet set;
  for (int n = 0; n < 3; ++n) {
    Matrix m(5, 4);
    for (double& v : m.values()) v = std::ldexp(mant(rng), expo(rng));
    set.labels.push_back("subject_" + std::to_string(n));
    set.classes.push_back(std::move(m));
  }
  return phase1_reconstruct(set, 3);
}

void require_same(const IntermediateTemplateSet& a, const IntermediateTemplateSet& b) {
  REQUIRE(a.labels == b.labels);
  REQUIRE(a.k == b.k);
  REQUIRE(a.provenance == b.provenance);
  REQUIRE(a.templates.size() == b.templates.size());
  for (std::size_t n = 0; n < a.templates.size(); ++n) {
    const auto x = a.templates[n].values();
    const auto y = b.templates[n].values();
    REQUIRE(x.size() == y.size());
    for (std::size_t e = 0; e < x.size(); ++e) REQUIRE(std::memcmp(&x[e], &y[e], sizeof(double)) == 0);
  }
}

}  // namespace

TEST_CASE("JSON store round-trips bit-exactly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tpl = random_store(seed);
    const auto doc = template_store_to_json(tpl);
    require_same(tpl, template_store_from_json(doc));
    CHECK(template_store_to_json(template_store_from_json(doc)) == doc);
  }
}

TEST_CASE("JSON store layout") {
  const auto tpl = random_store(1);
  const auto doc = nlohmann::json::parse(template_store_to_json(tpl));
  CHECK(doc["format"] == "iatr-template-store");
  CHECK(doc["version"] == 1);
  CHECK(doc["num_classes"] == 3);
  CHECK(doc["dim"] == 4);
  CHECK(doc["k"] == 3);
  CHECK(doc["templates"].size() == 3 * 3 * 4);
  CHECK(doc["provenance"].size() == 3 * 3 * 4);
  // row-major over (class, template, dim)
  CHECK(doc["templates"][4 * 3 + 1].get<double>() == tpl.templates[1](0, 1));
  CHECK(doc["provenance"][4 * 3 + 1].get<std::size_t>() == tpl.source_index(1, 0, 1));
}

TEST_CASE("JSON store rejects bad documents") {
  auto doc = nlohmann::json::parse(template_store_to_json(random_store(2)));
  auto expect_parse_error = [](const std::string& s) {
    try {
      template_store_from_json(s);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  };
  expect_parse_error("{not json");
  auto wrong_version = doc;
  wrong_version["version"] = 99;
  expect_parse_error(wrong_version.dump());
  auto short_tensor = doc;
  short_tensor["templates"].erase(0);
  expect_parse_error(short_tensor.dump());
}

TEST_CASE("CSV store round-trips") {
  const auto tpl = random_store(3);
  std::stringstream buf;
  write_template_store_csv(buf, tpl);
  const std::string text = buf.str();
  CHECK(text.rfind("class,template_index,dim,value,source_instance\n", 0) == 0);
  std::istringstream in(text);
  require_same(tpl, read_template_store_csv(in));
}

TEST_CASE("store files chosen by extension") {
  const auto dir = std::filesystem::temp_directory_path() / "iatr_store_test";
  std::filesystem::create_directories(dir);
  const auto tpl = random_store(4);
  save_template_store(dir / "s.json", tpl);
  save_template_store(dir / "s.csv", tpl);
  require_same(tpl, load_template_store(dir / "s.json"));
  require_same(tpl, load_template_store(dir / "s.csv"));
  try {
    load_template_store(dir / "missing.json");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }
  std::filesystem::remove_all(dir);
}
