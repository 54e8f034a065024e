#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "subtherm/job.hpp"

using namespace subtherm;

namespace {

const char* kMinimal = R"({
  "subshift": {"q": 2, "adjacency": [[1, 1], [1, 1]]},
  "cocycle": {"d": 2, "s": 1, "generators": {"1": [[1, 0], [0, 1]], "2": [[1, 0], [0, 1]]}},
  "command": "pressure"
})";

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(SUBTHERM_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(SUBTHERM_SAMPLES) + "/" + name; }

json strip_time(json doc) {
  doc.erase("wall_time");
  return doc;
}

}  // namespace

// ---------------------------------------------------------------- parsing

TEST(ParseJob, MinimalDocument) {
  const auto job = parse_job(std::string(kMinimal));
  EXPECT_EQ(job.command, "pressure");
  EXPECT_EQ(job.subshift, Subshift::full(2));
  ASSERT_TRUE(job.cocycle);
  EXPECT_EQ(job.cocycle->d, 2);
  EXPECT_EQ(job.budget, 1000000);
}

TEST(ParseJob, RowLengthNamesField) {
  auto doc = json::parse(kMinimal);
  doc["cocycle"]["generators"]["2"] = json::array({json::array({1, 0}), json::array({0})});
  try {
    parse_job(doc);
    FAIL() << "expected SchemaError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
    EXPECT_NE(std::string(e.what()).find("/cocycle/generators/2"), std::string::npos) << e.what();
  }
}

TEST(ParseJob, NonPrimitiveNeedsOverride) {
  auto doc = json::parse(kMinimal);
  doc["subshift"]["adjacency"] = json::array({json::array({1, 0}), json::array({0, 1})});
  EXPECT_ERROR_KIND(parse_job(doc), ErrorKind::NotPrimitive);
  std::vector<std::string> warnings;
  EXPECT_NO_THROW(parse_job(doc, true, &warnings));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ParseJob, SingularGenerator) {
  auto doc = json::parse(kMinimal);
  doc["cocycle"]["generators"]["1"] = json::array({json::array({1, 2}), json::array({2, 4})});
  EXPECT_ERROR_KIND(parse_job(doc), ErrorKind::SingularMatrix);
}

TEST(ParseJob, SchemaErrors) {
  EXPECT_ERROR_KIND(parse_job(std::string("{ not json")), ErrorKind::SchemaError);
  auto doc = json::parse(kMinimal);
  doc["command"] = "frobnicate";
  EXPECT_ERROR_KIND(parse_job(doc), ErrorKind::SchemaError);
  doc = json::parse(kMinimal);
  doc["budget"] = 0;
  EXPECT_ERROR_KIND(parse_job(doc), ErrorKind::SchemaError);
  doc = json::parse(kMinimal);
  doc.erase("cocycle");
  EXPECT_ERROR_KIND(parse_job(doc), ErrorKind::SchemaError);
}

TEST(ParseJob, LineAndColumnInParseErrors) {
  try {
    parse_job(std::string("{\n  \"subshift\": ,\n}"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(RoundTrip, SerializeThenParse) {
  for (const char* name : {"pressure_golden_mean.json", "gibbs_diagonal.json", "mixing_swap.json",
                           "product_check_diagonal.json", "power_check_golden_mean.json", "classify_two_states.json",
                           "classify_antidiagonal.json", "typicality_flagship.json", "additive_cohomology.json"}) {
    std::ifstream in(sample(name));
    std::stringstream s;
    s << in.rdbuf();
    const auto job = parse_job(s.str());
    const auto again = parse_job(serialize_job(job).dump());
    EXPECT_EQ(job, again) << name;
    // Shortest round-trip floats survive text.
    EXPECT_EQ(parse_job(serialize_job(job).dump(2)), job) << name;
  }
}

TEST(RoundTrip, AwkwardFloats) {
  auto doc = json::parse(kMinimal);
  doc["cocycle"]["generators"]["1"] = json::array({json::array({0.1 + 0.2, 1e-300}), json::array({-1.0 / 3.0, 7.0})});
  doc["cocycle"]["s"] = 1.0 / 7.0;
  const auto job = parse_job(doc);
  EXPECT_EQ(parse_job(serialize_job(job).dump()), job);
}

// ---------------------------------------------------------------- run_job

TEST(RunJob, PressureReport) {
  auto doc = json::parse(kMinimal);
  doc["subshift"]["adjacency"] = json::array({json::array({1, 1}), json::array({1, 0})});
  const auto rep = run_job(parse_job(doc), {});
  EXPECT_EQ(rep.exit_code, 0);
  const auto& r = rep.document["result"];
  EXPECT_LE(r["lower"].get<double>(), 0.48121);
  EXPECT_GE(r["upper"].get<double>(), 0.48122);
  EXPECT_EQ(rep.document["tool"], "subtherm");
  EXPECT_TRUE(rep.document.contains("wall_time"));
  EXPECT_EQ(rep.document["input"], serialize_job(parse_job(doc)));
}

TEST(RunJob, ErrorsBecomeObjects) {
  auto doc = json::parse(kMinimal);
  doc["command"] = "power-check";
  doc["params"] = {{"n", 1}};
  const auto rep = run_job(parse_job(doc), {});
  EXPECT_EQ(rep.exit_code, 1);
  EXPECT_EQ(rep.document["error"]["kind"], "InvalidArgument");
}

TEST(RunJob, DeterministicAcrossThreads) {
  auto doc = json::parse(kMinimal);
  doc["cocycle"]["generators"]["1"] = json::array({json::array({2, 1}), json::array({0, 1})});
  doc["cocycle"]["generators"]["2"] = json::array({json::array({0, 1}), json::array({1, 0})});
  doc["cocycle"]["s"] = 1.3;
  const auto job = parse_job(doc);
  RunOptions one, many;
  many.threads = 4;
  const auto a = strip_time(run_job(job, one).document).dump();
  EXPECT_EQ(a, strip_time(run_job(job, one).document).dump());
  EXPECT_EQ(a, strip_time(run_job(job, many).document).dump());
}

TEST(RunJob, InconclusiveExitCode) {
  auto doc = json::parse(kMinimal);
  doc["cocycle"]["generators"]["1"] = json::array({json::array({0, 2}), json::array({1, 0})});
  doc["cocycle"]["generators"]["2"] = json::array({json::array({0, 2}), json::array({1, 0})});
  doc["command"] = "classify2x2";
  const auto rep = run_job(parse_job(doc), {});
  EXPECT_EQ(rep.document["result"]["tag"], "Inconclusive");
  EXPECT_EQ(rep.exit_code, 2);
}

// ---------------------------------------------------------------- binary

TEST(Binary, PressureSample) {
  const auto r = run_cli(sample("pressure_golden_mean.json") + " --threads 2");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = json::parse(r.out);
  EXPECT_LE(doc["result"]["lower"].get<double>(), 0.481212);
  EXPECT_GE(doc["result"]["upper"].get<double>(), 0.481212);
}

TEST(Binary, ClassifySamples) {
  auto r = run_cli(sample("classify_two_states.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(json::parse(r.out)["result"]["tag"], "ReducibleTwoStates");
  r = run_cli(sample("classify_antidiagonal.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(json::parse(r.out)["result"]["tag"], "AntidiagonalPeriodTwo");
}

TEST(Binary, TypicalitySample) {
  const auto r = run_cli(sample("typicality_flagship.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = json::parse(r.out)["result"];
  EXPECT_TRUE(doc["certified"].get<bool>());
  EXPECT_EQ(doc["certificate"]["p"], "1");
  EXPECT_EQ(doc["certificate"]["z"]["core"], "2");
  EXPECT_TRUE(doc["power_check"]["certified"].get<bool>());
}

TEST(Binary, EverySampleRuns) {
  for (const char* name : {"gibbs_diagonal.json", "mixing_swap.json", "product_check_diagonal.json",
                           "power_check_golden_mean.json", "additive_cohomology.json"}) {
    const auto r = run_cli(sample(name));
    EXPECT_EQ(r.code, 0) << name << "\n" << r.out;
    const auto doc = json::parse(r.out);
    EXPECT_TRUE(doc.contains("result")) << name;
  }
}

TEST(Binary, AdditiveSampleFindsWitness) {
  const auto doc = json::parse(run_cli(sample("additive_cohomology.json")).out)["result"];
  EXPECT_EQ(doc["cohomology"]["verdict"], "NotCohomologous");
  EXPECT_EQ(doc["cohomology"]["witness"], "1");
}

TEST(Binary, BatchEmitsArray) {
  const auto r = run_cli("--batch " + sample("batch.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = json::parse(r.out);
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc.size(), 3u);
}

TEST(Binary, CsvOutput) {
  const std::string path = ::testing::TempDir() + "subtherm_gibbs.csv";
  const auto r = run_cli(sample("gibbs_diagonal.json") + " --csv " + path);
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "n,word,weight,gibbs_ratio");
}

TEST(Binary, BadInputExitsOne) {
  const std::string path = ::testing::TempDir() + "subtherm_bad.json";
  std::ofstream(path) << R"({"subshift": {"q": 2, "adjacency": [[1, 0], [0, 1]]}, "command": "pressure"})";
  const auto r = run_cli(path);
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["error"]["kind"], "NotPrimitive");
}

TEST(Binary, ChainSumFlagTightensDiagonal) {
  const std::string path = ::testing::TempDir() + "subtherm_diag.json";
  std::ofstream(path) << R"({"subshift": {"q": 2, "adjacency": [[1, 1], [1, 1]]},
    "cocycle": {"d": 2, "s": 1, "generators": {"1": [[2, 0], [0, 1]], "2": [[3, 0], [0, 1]]}},
    "command": "pressure"})";
  const auto plain = json::parse(run_cli(path).out)["result"];
  const auto summed = json::parse(run_cli(path + " --chain-sum").out)["result"];
  EXPECT_GT(summed["lower"].get<double>(), plain["lower"].get<double>());
  EXPECT_LT(summed["upper"].get<double>() - summed["lower"].get<double>(), 0.2);
}
