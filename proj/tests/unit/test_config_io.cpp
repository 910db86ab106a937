#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shelab/config.hpp"
#include "shelab/io.hpp"

using namespace shelab;

namespace {

const char* kSine = R"(experiment: equivalence
domain.kind: periodic
grid.n_space: 32
grid.n_time: 128
drift.form: sine
drift.amplitude: 1.5
run.realizations: 8
run.seed: 7
)";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

bool has_violation(const ExperimentConfig& c, const std::string& needle) {
  for (const auto& v : config_violations(c)) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("parse reads dotted keys") {
  const auto c = parse_config(kSine);
  CHECK(c.experiment == "equivalence");
  CHECK(c.setup.kind == DomainKind::PeriodicUnit);
  CHECK(c.n_space == 32);
  CHECK(c.n_time == 128);
  CHECK(c.drift.form == DriftForm::Sine);
  CHECK(c.realizations == 8);
  CHECK(c.seed == 7);
  CHECK(config_violations(c).empty());
}

TEST_CASE("serialize then parse is a fixed point") {
  for (const char* text :
       {kSine, "domain.kind: whole_line\ndomain.torus_width: 10\ndrift.form: power\ndrift.exponent: 0.5\ndrift.p: 1.9\n",
        "domain.kind: neumann\ndrift.form: atomic\ndrift.locations: [0, 0.5]\ndrift.weights: [1, -2]\n",
        "drift.form: indicator\ndrift.lower: -0.25\ndrift.upper: 0.75\nkappa.lags: [3, 4, 5, 6, 7]\n"}) {
    const std::string once = serialize_config(parse_config(text));
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
    CHECK(config_hash(parse_config(once)) == config_hash(parse_config(text)));
  }
}

TEST_CASE("config hash") {
  const auto a = parse_config(kSine);
  CHECK(config_hash(a).size() == 64);
  CHECK(config_hash(a) == config_hash(parse_config(kSine)));
  auto b = a;
  b.seed = 8;
  CHECK(config_hash(a) != config_hash(b));
  // key order does not matter
  CHECK(config_hash(parse_config("run.seed: 7\ndrift.form: sine\n")) ==
        config_hash(parse_config("drift.form: sine\nrun.seed: 7\n")));
}

TEST_CASE("malformed configs fail closed with a line number") {
  CHECK(error_line("drift.form: sine\nrun.seed: 3\nbogus.key: 1\n") == 3);
  CHECK(error_line("drift.form: sine\ndrift.form: sign\n") == 2);
  CHECK(error_line("grid.n_space: many\n") == 1);
  CHECK(error_line("drift.form: sine\ndrift.form: [unterminated\n") >= 1);
  CHECK(error_line("drift.form: wobble\n") == 1);
  CHECK_THROWS_AS(parse_config("- a\n- b\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/shelab.yaml"), std::exception);
}

TEST_CASE("validation examples") {
  SUBCASE("whole line torus too narrow") {
    const auto c = parse_config("domain.kind: whole_line\ndomain.torus_width: 2\ngrid.horizon: 1\n");
    CHECK(has_violation(c, "torus"));
  }
  SUBCASE("power singularity must be locally integrable") {
    const auto c = parse_config("drift.form: power\ndrift.exponent: 1.5\n");
    CHECK_FALSE(config_violations(c).empty());
  }
  SUBCASE("valid periodic config") { CHECK(config_violations(parse_config(kSine)).empty()); }
  SUBCASE("kappa needs a function drift") {
    const auto c = parse_config("experiment: kappa\ndrift.form: delta\n");
    CHECK(has_violation(c, "kappa"));
  }
}

TEST_CASE("derived quantities") {
  const auto d = derived_quantities(parse_config(kSine));
  auto find = [&](const std::string& name) {
    for (const auto& q : d) {
      if (q.name == name) return q.value;
    }
    return std::string("missing");
  };
  CHECK(find("resolution.0.dx") == "0.03125");
  CHECK(find("resolution.0.dt") == "0.0078125");
  CHECK(find("resolution.2.n_space") == "128");
  CHECK(find("kappa.theory") == "1");
  const auto w = derived_quantities(parse_config("domain.kind: whole_line\ndomain.torus_width: 10\n"));
  bool torus = false;
  for (const auto& q : w) torus = torus || (q.name == "torus_width.required" && q.value == "8");
  CHECK(torus);
}

TEST_CASE("every key is documented") {
  for (const auto& k : config_keys()) {
    CHECK_FALSE(k.key.empty());
    CHECK_FALSE(k.help.empty());
  }
}

TEST_CASE("csv and ndjson carry the schema header") {
  const std::vector<VerdictRow> rows{{"kappa", "n256_t256", "kappa_hat", 0.976, 0.01, Verdict::Info},
                                     {"kappa", "n256_t256", "within", 1.0, 0.0, Verdict::Pass}};
  std::ostringstream csv;
  write_csv(csv, rows);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# shelab verdicts schema v1");
  std::getline(in, line);
  CHECK(line == "experiment,resolution,statistic,value,stderr,verdict");
  std::getline(in, line);
  CHECK(line == "kappa,n256_t256,kappa_hat,0.976,0.01,INFO");

  std::ostringstream nd;
  write_ndjson(nd, rows, {{{"record", "extra"}}});
  std::istringstream nin(nd.str());
  std::vector<nlohmann::json> recs;
  while (std::getline(nin, line)) recs.push_back(nlohmann::json::parse(line));
  REQUIRE(recs.size() == 4);
  CHECK(recs[0]["version"] == kSchemaVersion);
  CHECK(recs[2]["verdict"] == "PASS");
  CHECK(recs[3]["record"] == "extra");
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("field dump round trip") {
  FieldRows f(3, 5);
  for (std::size_t k = 0; k < f.data.size(); ++k) f.data[k] = std::sin(1.0 + k) * 1e3;
  const auto path = std::filesystem::temp_directory_path() / "shelab_dump_test.bin";
  write_field_dump(path.string(), f);
  CHECK(std::filesystem::file_size(path) == 16 + 8 * 15);
  const auto g = read_field_dump(path.string());
  CHECK(g.rows == 3);
  CHECK(g.cols == 5);
  CHECK(g.data == f.data);
  {
    std::ofstream trunc(path, std::ios::binary | std::ios::trunc);
    trunc << "short";
  }
  CHECK_THROWS(read_field_dump(path.string()));
  std::filesystem::remove(path);
}
