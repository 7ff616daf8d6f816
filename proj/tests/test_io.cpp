#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "franson/io.hpp"

using namespace franson;

TEST_CASE("key/value parsing") {
  const auto kv = parse_key_values(
      "# leading comment\n"
      "kind = dynamics\n"
      "\n"
      "gamma_a = 2.0  # trailing comment\n"
      "  dt=0.05\t\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("kind") == "dynamics");
  CHECK(kv.at("gamma_a") == "2.0");
  CHECK(kv.at("dt") == "0.05");
}

TEST_CASE("parser aggregates every malformed line") {
  try {
    parse_key_values("kind dynamics\nx = 1\nx = 2\n= y\n");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("duplicate key 'x'") != std::string::npos);
    CHECK(msg.find("empty key") != std::string::npos);
  }
}

TEST_CASE("config resolves a full experiment") {
  const ExperimentSpec spec = spec_from_config(
      "kind = benchmark\n"
      "gamma_a = 1\n"
      "gamma_b = 4\n"
      "dt = 0.05\n"
      "n_steps = 40\n"
      "n_t = 4\n"
      "phi_t_list = 0, 0.7853981633974483, 1.5707963267948966\n"
      "max_bond = 48\n"
      "epsilon = 1e-10\n"
      "output_path = out.csv\n"
      "threads = 2\n");
  CHECK(spec.kind == "benchmark");
  CHECK(spec.params.gamma_b == 4.0);
  CHECK(spec.params.n_steps == 40);
  REQUIRE(spec.phi_t_list.size() == 3);
  CHECK(spec.phi_t_list[1] == doctest::Approx(M_PI / 4.0));
  REQUIRE(spec.params.truncation.max_bond.has_value());
  CHECK(*spec.params.truncation.max_bond == 48);
  CHECK(spec.params.truncation.epsilon == 1e-10);
  CHECK(spec.output_path == "out.csv");
  CHECK(spec.threads == 2);
}

TEST_CASE("config errors are reported together and name the offender") {
  try {
    spec_from_config(
        "kind = dynamics\n"
        "gamma_a = fast\n"
        "n_steps = 1.5\n"
        "turbo = yes\n"
        "feedback_enabled = maybe\n");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("gamma_a") != std::string::npos);
    CHECK(msg.find("n_steps") != std::string::npos);
    CHECK(msg.find("unknown key 'turbo'") != std::string::npos);
    CHECK(msg.find("feedback_enabled") != std::string::npos);
  }
}

TEST_CASE("empty config lists the missing pieces") {
  CHECK_THROWS_WITH_AS(spec_from_config(""), doctest::Contains("kind"),
                       std::invalid_argument);
}

TEST_CASE("sweep kind requires both rate lists") {
  try {
    spec_from_config("kind = sweep\n");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("gamma_a_T_list") != std::string::npos);
    CHECK(msg.find("gamma_b_T_list") != std::string::npos);
  }
}

TEST_CASE("model invariants are enforced at config time") {
  CHECK_THROWS_WITH_AS(spec_from_config("kind = dynamics\ndt = 0.3\n"),
                       doctest::Contains("dt"), std::invalid_argument);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02e23, 1e-300, M_PI}) {
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("csv output is deterministic and self-describing") {
  const ExperimentSpec spec = spec_from_config(
      "kind = dynamics\ngamma_a = 1\ngamma_b = 2\ndt = 0.1\nn_steps = 3\n");
  const std::vector<std::string> cols = {"t", "pop_a"};
  const std::vector<std::vector<double>> rows = {{0.0, 1.0}, {0.1, 0.9048}};
  const std::string a = csv_document(spec, cols, rows);
  const std::string b = csv_document(spec, cols, rows);
  CHECK(a == b);
  CHECK(a.find("# gamma_b = 2\n") != std::string::npos);
  CHECK(a.find("t,pop_a\n") != std::string::npos);
  CHECK(a.find("0.1,0.9048\n") != std::string::npos);
  CHECK_THROWS_AS(csv_document(spec, cols, {{1.0}}), std::logic_error);
}

TEST_CASE("json sidecar carries the same metadata") {
  const ExperimentSpec spec = spec_from_config(
      "kind = dynamics\ngamma_a = 1\ngamma_b = 2\ndt = 0.1\nn_steps = 3\n");
  const auto j = nlohmann::json::parse(json_sidecar(spec, {"t", "pop_a"}));
  CHECK(j["params"]["kind"] == "dynamics");
  CHECK(j["params"]["gamma_b"] == "2");
  CHECK(j["columns"] == nlohmann::json({"t", "pop_a"}));
}

TEST_CASE("write_file fails loudly on bad paths") {
  CHECK_THROWS_AS(write_file("/nonexistent-dir/x.csv", "body"), std::runtime_error);
}
