#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/kms_cli.hpp"
#include "kms/json_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using kms::LaurentPoly;
using kms::OrderedJson;
using testsupport::expo;
using testsupport::random_poly;

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream oss;
  int code = kmscli::run_argv(std::move(args), oss);
  return {code, oss.str()};
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("kms_cli_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
}

std::string read_back(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const std::string kSl2 =
    "{\"rank\":1,\"generators\":[\"s\"],\"simple_roots\":[[2]],"
    "\"simple_coroots\":[[1]]}\n";
const std::string kA2 =
    "{\"rank\":2,\"generators\":[\"s\",\"t\"],"
    "\"simple_roots\":[[2,-1],[-1,2]],\"simple_coroots\":[[1,0],[0,1]]}\n";

}  // namespace

TEST_CASE("polynomial json round trip") {
  std::mt19937 rng(7001);
  for (int t = 0; t < 40; ++t) {
    LaurentPoly p = random_poly(rng, 3, 8, -6, 6, 50);
    OrderedJson j = kms::poly_to_json(p);
    REQUIRE(kms::poly_from_json(j, 3) == p);
  }

  // coefficients beyond 64 bits travel as decimal strings
  mpz_class big("340282366920938463463374607431768211457");
  LaurentPoly p = LaurentPoly::monomial({1, -2}, big);
  OrderedJson j = kms::poly_to_json(p);
  REQUIRE(j["terms"][0]["coeff"].is_string());
  REQUIRE(kms::poly_from_json(j, 2) == p);

  // emission is sorted lexicographically by exponent
  LaurentPoly q = expo({2, 0}) + expo({-1, 5}) + expo({-1, -3}) + expo({0, 0});
  OrderedJson qj = kms::poly_to_json(q);
  std::vector<kms::LatticePoint> exps;
  for (const auto& term : qj["terms"])
    exps.push_back(term["exp"].get<kms::LatticePoint>());
  REQUIRE(std::is_sorted(exps.begin(), exps.end()));

  REQUIRE_THROWS_AS(kms::poly_from_json(OrderedJson::parse("{\"terms\":[{\"exp\":[1],"
                                                           "\"coeff\":1}]}"),
                                        2),
                    kms::KmsError);
}

TEST_CASE("datum and word json round trip") {
  kms::RootDatum d = testsupport::a2_sc();
  OrderedJson j = kms::datum_to_json(d);
  kms::RootDatum back = kms::datum_from_json(j);
  REQUIRE(back.gens == d.gens);
  REQUIRE(back.simple_roots == d.simple_roots);
  REQUIRE(back.simple_coroots == d.simple_coroots);
  REQUIRE(kms::datum_to_json(back) == j);

  REQUIRE(kms::word_from_csv(d, "e").empty());
  REQUIRE(kms::word_from_csv(d, "").empty());
  REQUIRE(kms::word_from_csv(d, "s1,s2,s1") == std::vector<std::size_t>{0, 1, 0});
  REQUIRE_THROWS_AS(kms::word_from_csv(d, "s1,,s2"), kms::KmsError);
  REQUIRE_THROWS_AS(kms::word_from_csv(d, "nope"), kms::KmsError);

  std::vector<std::size_t> w{1, 0};
  REQUIRE(kms::word_from_json(d, kms::word_to_json(d, w)) == w);
}

TEST_CASE("morphism and complex json round trip") {
  kms::SBimContext ctx(testsupport::sl2_sc());

  kms::BimMorphism c = kms::central_element(ctx, 0);
  OrderedJson cj = kms::morphism_to_json(ctx.datum(), c);
  kms::BimMorphism back = kms::morphism_from_json(ctx, cj);
  REQUIRE(back.mat == c.mat);
  REQUIRE(kms::morphism_to_json(ctx.datum(), back) == cj);

  // a matrix that fails the intertwining relations is rejected
  OrderedJson tampered = cj;
  tampered["matrix"][1][0] = kms::poly_to_json(expo({3}));
  REQUIRE_THROWS_AS(kms::morphism_from_json(ctx, tampered), kms::KmsError);

  kms::ChainComplex dn = kms::tensor_complex(ctx, kms::rouquier_deltas(ctx, {0}),
                                             kms::rouquier_nablas(ctx, {0}));
  OrderedJson xj = kms::complex_to_json(ctx.datum(), dn);
  kms::ChainComplex rt = kms::complex_from_json(ctx, xj);
  REQUIRE(kms::complex_to_json(ctx.datum(), rt) == xj);

  // breaking d^2 = 0 is caught on parse
  OrderedJson broken = xj;
  broken["differentials"]["-1"][0][0] = kms::poly_to_json(LaurentPoly::one(1));
  REQUIRE_THROWS_AS(kms::complex_from_json(ctx, broken), kms::KmsError);
}

TEST_CASE("cli pinned outputs") {
  fs::path dir = fresh_dir("pinned");
  write_file(dir / "sl2.json", kSl2);

  RunResult mult = run({"bim", "stdmult", "--word", "s,s", "--datum",
                        (dir / "sl2.json").string()});
  REQUIRE(mult.code == 0);
  REQUIRE(mult.out == "{\"e\":2,\"s\":2}\n");

  RunResult unit = run({"cx", "unit", "delta:s*nabla:s", "--datum",
                        (dir / "sl2.json").string()});
  REQUIRE(unit.code == 0);
  REQUIRE(unit.out == "{\"unit\":true}\n");

  RunResult rev = run({"cx", "unit", "nabla:s*delta:s", "--datum",
                       (dir / "sl2.json").string()});
  REQUIRE(rev.code == 0);
  REQUIRE(rev.out == "{\"unit\":true}\n");
}

TEST_CASE("cli dual is an involution on canonical files") {
  fs::path dir = fresh_dir("dual");
  write_file(dir / "a2.json", kA2);

  RunResult once = run({"datum", "dual", (dir / "a2.json").string()});
  REQUIRE(once.code == 0);
  write_file(dir / "dual.json", once.out);
  RunResult twice = run({"datum", "dual", (dir / "dual.json").string()});
  REQUIRE(twice.code == 0);
  REQUIRE(twice.out == kA2);
}

TEST_CASE("cli exit codes and error shapes") {
  fs::path dir = fresh_dir("errors");
  write_file(dir / "sl2.json", kSl2);
  write_file(dir / "pgl2.json",
             "{\"rank\":1,\"generators\":[\"s\"],\"simple_roots\":[[1]],"
             "\"simple_coroots\":[[2]]}\n");

  // missing --datum is a usage error
  RunResult usage = run({"weyl", "length", "--word", "s"});
  REQUIRE(usage.code == 2);
  REQUIRE(OrderedJson::parse(usage.out)["error"] == "usage");

  // unknown subcommand is a usage error too
  REQUIRE(run({"frobnicate"}).code == 2);

  // domain errors report a code and a detail line
  RunResult dom = run({"dem", "split", "--gen", "s", "--poly", "{\"terms\":[]}",
                       "--datum", (dir / "pgl2.json").string()});
  REQUIRE(dom.code == 1);
  OrderedJson dj = OrderedJson::parse(dom.out);
  REQUIRE(dj["error"] == "not_sc_type");
  REQUIRE(dj.contains("detail"));

  RunResult div = run({"ring", "div", "--p", "{\"terms\":[{\"exp\":[1],\"coeff\":1}]}",
                       "--q", "{\"terms\":[{\"exp\":[0],\"coeff\":2}]}"});
  REQUIRE(div.code == 1);
  REQUIRE(OrderedJson::parse(div.out)["error"] == "not_divisible");

  RunResult io = run({"datum", "classify", (dir / "missing.json").string()});
  REQUIRE(io.code == 1);
  REQUIRE(OrderedJson::parse(io.out)["error"] == "io_error");

  RunResult help = run({"--help"});
  REQUIRE(help.code == 0);
  REQUIRE(help.out.find("Usage") != std::string::npos);
}

TEST_CASE("cli emitted values parse back") {
  fs::path dir = fresh_dir("roundtrip");
  write_file(dir / "sl2.json", kSl2);
  kms::SBimContext ctx(kms::RootDatum(kms::Lattice(1), {"s"}, {{2}}, {{1}}));

  RunResult rq = run({"cx", "rouquier", "--word", "s", "--datum",
                      (dir / "sl2.json").string()});
  REQUIRE(rq.code == 0);
  kms::ChainComplex c = kms::complex_from_json(ctx, OrderedJson::parse(rq.out));
  REQUIRE(c.min_degree() == -1);
  REQUIRE(c.max_degree() == 0);

  // feed the emitted complex back in through file: and minimize it
  write_file(dir / "cx.json", rq.out);
  RunResult min = run({"cx", "minimize",
                       "file:" + (dir / "cx.json").string() + "*nabla:s", "--datum",
                       (dir / "sl2.json").string()});
  REQUIRE(min.code == 0);
  OrderedJson mj = OrderedJson::parse(min.out);
  REQUIRE(mj["certificate_verified"] == true);
  REQUIRE(mj["minimized"]["degrees"].size() == 1);

  RunResult gr = run({"bim", "grmap", "--gen", "s", "--datum",
                      (dir / "sl2.json").string()});
  REQUIRE(gr.code == 0);
  kms::BimMorphism f = kms::morphism_from_json(ctx, OrderedJson::parse(gr.out));
  REQUIRE(f.src.total_rank() == 2);
}

TEST_CASE("batch harness updates, replays, and catches drift") {
  fs::path dir = fresh_dir("batch");
  fs::create_directories(dir / "golden");
  write_file(dir / "sl2.json", kSl2);
  write_file(dir / "a2.json", kA2);

  std::string cmds;
  cmds += "datum classify " + (dir / "a2.json").string() + "\n";
  cmds += "# fixtures skip comments and blank lines\n\n";
  cmds += "weyl enum --max-length 2 --datum " + (dir / "a2.json").string() + "\n";
  cmds += "dem apply --gen s --poly \"{\\\"terms\\\":[{\\\"exp\\\":[2],\\\"coeff\\\":1}]}\""
          " --datum " + (dir / "sl2.json").string() + "\n";
  cmds += "weyl length --word s\n";  // exit 2 is recorded, not fatal
  write_file(dir / "batch.txt", cmds);

  std::string golden = (dir / "golden").string();
  RunResult up = run({"batch", (dir / "batch.txt").string(), "--golden", golden,
                      "--update"});
  REQUIRE(up.code == 0);
  REQUIRE(fs::exists(dir / "golden" / "case_004.txt"));
  REQUIRE(read_back(dir / "golden" / "case_004.txt").rfind("exit 2\n", 0) == 0);

  RunResult replay = run({"batch", (dir / "batch.txt").string(), "--golden", golden});
  REQUIRE(replay.code == 0);
  REQUIRE(replay.out.find("4 of 4 cases match") != std::string::npos);

  // identical output regardless of worker count
  RunResult t2 = run({"batch", (dir / "batch.txt").string(), "--golden", golden,
                      "--threads", "2"});
  RunResult t8 = run({"batch", (dir / "batch.txt").string(), "--golden", golden,
                      "--threads", "8"});
  REQUIRE(t2.out == replay.out);
  REQUIRE(t8.out == replay.out);

  // corrupting a fixture fails the replay with a diff
  write_file(dir / "golden" / "case_002.txt", "exit 0\nstale\n");
  RunResult bad = run({"batch", (dir / "batch.txt").string(), "--golden", golden});
  REQUIRE(bad.code == 1);
  REQUIRE(bad.out.find("FAIL case_002") != std::string::npos);
  REQUIRE(bad.out.find("--- expected") != std::string::npos);

  // a missing fixture is a failure, not a silent pass
  fs::remove(dir / "golden" / "case_001.txt");
  REQUIRE(run({"batch", (dir / "batch.txt").string(), "--golden", golden}).code == 1);
}
