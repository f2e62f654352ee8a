#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "ffexp/cache.hpp"
#include "ffexp/cli.hpp"
#include "ffexp/modulus.hpp"

using namespace ffexp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
  {
    path = fs::temp_directory_path() / ("ffexp-test-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text)
{
  std::ofstream out(p);
  out << text;
}

RunOptions options(const TempDir& d)
{
  RunOptions o;
  o.cache_dir = d.path / "cache";
  return o;
}

const char* kSl2Seven = "[field]\np = 7\n[group]\nmodulus = t+5\ngenerators = standard\n";

}  // namespace

TEST_CASE("config parsing and schema")
{
  auto cfg = ExperimentConfig::parse("[field]\np = 7\n[admissible]\nr0 = t\nc0 = 5\nmax_deg = 5\n");
  CHECK(cfg.get_uint("field.p") == 7);
  CHECK(cfg.get_string("admissible.r0") == "t");
  CHECK_NOTHROW(cfg.validate("admissible"));
  CHECK_THROWS_AS(cfg.validate("entropy"), ConfigError);
  CHECK_THROWS_AS(cfg.validate("nonsense"), ConfigError);
  CHECK_THROWS_AS(cfg.get_uint("admissible.missing"), ConfigError);
  CHECK(cfg.get_uint("admissible.missing", 3) == 3);

  auto reordered = ExperimentConfig::parse("[admissible]\nmax_deg=5\nc0=5\nr0=t\n[field]\np=7\n");
  CHECK(reordered.hash() == cfg.hash());
  auto changed = ExperimentConfig::parse("[field]\np = 7\n[admissible]\nr0 = t\nc0 = 3\nmax_deg = 5\n");
  CHECK(changed.hash() != cfg.hash());

  CHECK_THROWS_AS(ExperimentConfig::parse("[field]\np = 7\n[admissible]\nmax_deg = five\n").validate("admissible"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[field]\np = -7\n").validate("admissible"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[field]\np = 7\n[group]\nmodulus = t\n[spectral]\ntrace_l = 2,x\n")
                      .validate("lambda"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("p = 7\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[field\np = 7\n"), ConfigError);
  auto list = ExperimentConfig::parse("[escape]\nl = 2, 4,8\n");
  CHECK(list.get_uint_list("escape.l") == std::vector<std::uint64_t>{2, 4, 8});
}

TEST_CASE("admissible listing matches the library enumeration")
{
  TempDir d("adm");
  auto cfg = ExperimentConfig::parse("[field]\np = 7\n[admissible]\nr0 = t\nc0 = 5\nmax_deg = 5\n");
  auto env = run_command("admissible", cfg, options(d));
  const FieldParams F(7);
  auto expected = enumerate_admissible({Poly(F, {0, 1}), 5, 5});
  REQUIRE(env.payload["count"] == expected.size());
  CHECK(env.payload["moduli"] == nlohmann::json(expected));
  CHECK(env.passed());
  CHECK(exit_code(env) == 0);
  CHECK(env.payload["count"].get<std::size_t>() > 0);
}

TEST_CASE("generate writes a cache that later runs reuse")
{
  TempDir d("gen");
  auto cfg = ExperimentConfig::parse(kSl2Seven);
  auto first = run_command("generate", cfg, options(d));
  CHECK(first.payload["order"] == 336);
  CHECK(first.assertions.at("strong_approximation"));
  CHECK(first.timing["from_cache"] == false);
  REQUIRE(first.cache_hashes.size() == 1);
  auto second = run_command("generate", cfg, options(d));
  CHECK(second.timing["from_cache"] == true);
  CHECK(nlohmann::json(second.payload) == nlohmann::json(first.payload));

  // The cache file carries the versioned header.
  fs::path file;
  for (const auto& e : fs::directory_iterator(d.path / "cache"))
    file = e.path();
  const std::string text = slurp(file);
  CHECK(text.rfind("ffexp-cache v1 group ", 0) == 0);

  auto bad = ExperimentConfig::parse(std::string(kSl2Seven) + "expected_order = 335\n");
  auto failed = run_command("generate", bad, options(d));
  CHECK_FALSE(failed.assertions.at("expected_order"));
  CHECK(exit_code(failed) == 2);

  // Equal factor degrees fall outside the strong-approximation check.
  auto twin = ExperimentConfig::parse("[field]\np = 7\n[group]\nmodulus = t^2+2*t+4\ngenerators = standard\n");
  const FieldParams F(7);
  Modulus f(parse_poly(F, "t^2+2*t+4"));
  REQUIRE(f.factors().size() == 2);
  auto te = run_command("generate", twin, options(d));
  CHECK(te.payload["strong_approximation_applicable"] == false);
  CHECK(te.assertions.count("strong_approximation") == 0);
  CHECK(te.payload["order"] == 336 * 336);
}

TEST_CASE("stale or foreign cache files are rejected")
{
  TempDir d("stale");
  auto cfg = ExperimentConfig::parse(kSl2Seven);
  auto env = run_command("generate", cfg, options(d));
  fs::path file;
  for (const auto& e : fs::directory_iterator(d.path / "cache"))
    file = e.path();
  const std::string text = slurp(file);
  const auto nl = text.find('\n');

  spit(file, "ffexp-cache v0 group " + file.stem().string().substr(6) + text.substr(nl));
  CHECK_THROWS_AS(run_command("generate", cfg, options(d)), CacheError);
  spit(file, "ffexp-cache v1 group 0000000000000000" + text.substr(nl));
  CHECK_THROWS_AS(run_command("generate", cfg, options(d)), CacheError);
  spit(file, text.substr(0, nl + 1) + "quotient linear\ngenerators 1 12\n");
  CHECK_THROWS_AS(run_command("generate", cfg, options(d)), CacheError);

  // A different generating set never reads the first cache.
  auto other = ExperimentConfig::parse("[field]\np = 7\n[group]\nmodulus = t+5\ngenerators = classical\n");
  auto o = run_command("generate", other, options(d));
  CHECK(o.cache_hashes != env.cache_hashes);

  Cache c(d.path / "direct");
  c.write("blob", "abc", "payload\n");
  CHECK(c.read("blob", "abc") == std::optional<std::string>("payload\n"));
  CHECK_FALSE(c.read("blob", "abd"));
}

TEST_CASE("lambda is deterministic and reuses the spectral cache")
{
  TempDir d("lambda");
  auto cfg = ExperimentConfig::parse(std::string(kSl2Seven) + "[spectral]\nmethod = power\ntrace_l = 2,4,12\nd_min = 3\n");
  auto a = run_command("lambda", cfg, options(d));
  auto b = run_command("lambda", cfg, options(d));
  CHECK(a.timing["from_cache"] == false);
  CHECK(b.timing["from_cache"] == true);
  CHECK(a.payload == b.payload);
  CHECK(a.assertions.at("spectral_gap"));
  CHECK(a.assertions.at("trace_bound"));

  TempDir d2("lambda2");
  auto c = run_command("lambda", cfg, options(d2));
  CHECK(c.timing["from_cache"] == false);
  CHECK(c.payload == a.payload);

  auto exact_cfg = ExperimentConfig::parse(std::string(kSl2Seven) + "[spectral]\nmethod = exact\ntrace_l = 2,3\n");
  auto opts = options(d);
  opts.exact = true;
  auto e = run_command("lambda", exact_cfg, opts);
  CHECK(e.assertions.at("return_identity"));
  CHECK(e.payload["report"]["method"] == "ExactDense");
  CHECK(e.payload["report"]["lambda"].get<double>() ==
        doctest::Approx(a.payload["report"]["lambda"].get<double>()).epsilon(1e-6));
  CHECK_FALSE(e.payload["trace_moments"][0]["exact_return"].is_null());
}

TEST_CASE("scan tables and summaries")
{
  TempDir d("scan");
  auto empty = ExperimentConfig::parse("[field]\np = 7\n[scan]\nmax_deg = 1\n");
  auto e = run_command("scan", empty, options(d));
  CHECK(e.payload["rows"].empty());
  CHECK(e.payload["min_gap"].is_null());
  CHECK(exit_code(e) == 0);
  CHECK(e.table == "f,deg_f,order,lambda,one_minus_lambda,method,seconds\n");

  auto cfg = ExperimentConfig::parse("[field]\np = 7\n[scan]\nmoduli = t+1; t+2; t+3\n[spectral]\nmethod = exact\n");
  auto opts = options(d);
  opts.out = d.path / "scan.json";
  opts.plot_data = d.path / "plot.csv";
  auto r = run_command("scan", cfg, opts);
  REQUIRE(r.payload["rows"].size() == 3);
  CHECK_FALSE(r.payload["rows"][0].contains("seconds"));
  CHECK(r.timing["rows"].size() == 3);
  CHECK(r.assertions.at("spectral_gap"));
  std::ostringstream sink;
  write_outputs(r, opts, sink);
  CHECK(sink.str().empty());
  auto json = nlohmann::json::parse(slurp(d.path / "scan.json"));
  CHECK(json["status"] == "passed");
  CHECK(json["payload"]["argmin_f"].is_string());
  const auto csv = slurp(d.path / "scan.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(slurp(d.path / "plot.csv").rfind("x,y,series\n", 0) == 0);

  // Gap behaviour as c0 varies; over F_3 the three irreducible quadratics
  // have degree with prime divisor 2 < 3.
  auto vary = ExperimentConfig::parse("[field]\np = 3\n[scan]\nmax_deg = 2\nc0 = 1,3\n[spectral]\nmethod = power\n");
  auto v = run_command("scan", vary, options(d));
  REQUIRE(v.payload["by_c0"].size() == 2);
  CHECK(v.payload["by_c0"][0]["count"] == 3);
  CHECK(v.payload["by_c0"][0]["min_gap"] == v.payload["min_gap"]);
  CHECK(v.payload["by_c0"][1]["count"] == 0);
  CHECK(v.payload["by_c0"][1]["min_gap"].is_null());

  auto both = ExperimentConfig::parse("[field]\np = 7\n[scan]\nmoduli = t+1\nmax_deg = 2\n");
  CHECK_THROWS_AS(run_command("scan", both, options(d)), ConfigError);
}

TEST_CASE("escape, dichotomy, multiscale and entropy commands")
{
  TempDir d("misc");
  auto esc = ExperimentConfig::parse(std::string(kSl2Seven) + "[escape]\nsubgroup = borel\nl = 2,4,8,16\nlimit_factor = 2\n");
  auto e = run_command("escape", esc, options(d));
  CHECK(e.passed());
  CHECK(e.payload["probe"]["index"] == 8);
  CHECK(e.table.rfind("l_or_m,value,bound,flag\n", 0) == 0);

  auto dich = ExperimentConfig::parse("[field]\np = 5\n[group]\nmodulus = t+3\n");
  auto c = run_command("dichotomy", dich, options(d));
  CHECK(c.payload["order"] == 120);
  CHECK(c.assertions.at("no_unclassified"));
  CHECK(c.assertions.at("subfield_sandwich"));
  CHECK(c.passed());

  for (const char* text :
       {"[multiscale]\nexperiment = gowers\nfactors = 7\ntrials = 5\nseed = 1\n",
        "[multiscale]\nexperiment = regularize\nfactors = 3,3,3\ntrials = 5\nset_size = 400\ndelta = 0.1\nseed = 2\n",
        "[multiscale]\nexperiment = exceptional\nfactors = 5\ntrials = 5\nseed = 3\n",
        "[multiscale]\nexperiment = helfgott\nfactors = 5\ntrials = 5\nseed = 4\n",
        "[multiscale]\nexperiment = renyi\nfactors = 5\nset_size = 50\nsamples = 3\nseed = 5\n",
        "[multiscale]\nexperiment = growth\nfactors = 7\nset_size = 30\ntrials = 2\nseed = 6\n"}) {
    auto cfg = ExperimentConfig::parse(text);
    auto a = run_command("multiscale", cfg, options(d));
    auto b = run_command("multiscale", cfg, options(d));
    CAPTURE(text);
    CHECK(a.passed());
    CHECK(a.payload == b.payload);
  }
  CHECK_THROWS_AS(run_command("multiscale", ExperimentConfig::parse("[multiscale]\nexperiment = gowers\nfactors = 7\n"),
                              options(d)),
                  ConfigError);

  auto ent = ExperimentConfig::parse("[entropy]\ntrials = 100\nseed = 9\n");
  auto en = run_command("entropy", ent, options(d));
  CHECK(en.assertions.at("entropy_laws"));
}

TEST_CASE("exit codes through run_cli and the executable")
{
  TempDir d("exit");
  auto opts = options(d);
  std::ostringstream out, err;
  spit(d.path / "ok.ini", "[field]\np = 7\n[admissible]\nmax_deg = 4\n");
  CHECK(run_cli("admissible", d.path / "ok.ini", opts, out, err) == 0);
  CHECK(nlohmann::json::parse(out.str())["status"] == "passed");

  spit(d.path / "bad.ini", "[field]\np = 7\n[admissible]\nmax_deg = 4\nunknown = 1\n");
  CHECK(run_cli("admissible", d.path / "bad.ini", opts, out, err) == 1);
  CHECK(err.str().find("unknown") != std::string::npos);
  CHECK(run_cli("admissible", d.path / "missing.ini", opts, out, err) == 1);

  spit(d.path / "neg.ini", std::string(kSl2Seven) + "expected_order = 7\n");
  CHECK(run_cli("generate", d.path / "neg.ini", opts, out, err) == 2);

  spit(d.path / "budget.ini", std::string(kSl2Seven) + "cap = 100\n");
  CHECK(run_cli("generate", d.path / "budget.ini", options(TempDir("budget")), out, err) == 1);

  const char* bin = std::getenv("FFEXP_BIN");
  if (!bin)
    return;
  auto run = [&](const std::string& args) {
    const int st = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  const std::string cache = " --cache-dir " + (d.path / "bincache").string();
  CHECK(run("admissible --config " + (d.path / "ok.ini").string() + " --out " + (d.path / "o.json").string() + cache) ==
        0);
  CHECK(nlohmann::json::parse(slurp(d.path / "o.json"))["command"] == "admissible");
  CHECK(run("generate --config " + (d.path / "neg.ini").string() + cache) == 2);
  CHECK(run("admissible --config " + (d.path / "bad.ini").string() + cache) == 1);
  CHECK(run("bogus --config " + (d.path / "ok.ini").string()) == 1);
  CHECK(run("admissible --config " + (d.path / "ok.ini").string() + " --threads 2 --emit-plot-data " +
            (d.path / "p.csv").string() + cache) == 0);
  CHECK(fs::exists(d.path / "p.csv"));
}
