#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ffexp/cli.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Desk-scale experiments on SL_2 over F_p[t]: admissible moduli, spectral gaps, walks, subgroup "
               "census, multi-scale products."};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", ffexp::kToolVersion);

  std::string config;
  std::string out, cache_dir, plot;
  unsigned threads = 1;
  bool exact = false;

  const std::map<std::string, std::string> about = {
      {"admissible", "List admissible moduli f over F_p"},
      {"generate", "Enumerate the reduction of a generating set mod f"},
      {"lambda", "Spectral radius of the Cayley averaging operator"},
      {"scan", "lambda over a family of moduli, with a CSV table"},
      {"escape", "Walk probabilities of landing in a subgroup"},
      {"dichotomy", "Classify every subgroup of SL_2, PSL_2 or PGL_2 over a finite field"},
      {"multiscale", "Product-group experiments: growth, gowers, regularize, exceptional, helfgott, renyi"},
      {"entropy", "Randomized check of the entropy inequalities"}};
  for (const auto& name : ffexp::command_names()) {
    auto* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
    sub->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Envelope JSON path (stdout when omitted)");
    sub->add_option("--cache-dir", cache_dir, "Cache directory (default $FFEXP_CACHE_DIR or .ffexp-cache)");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
    sub->add_flag("--exact", exact, "Rational arithmetic where supported");
    sub->add_option("--emit-plot-data", plot, "Write x,y,series triples to this CSV path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ffexp::RunOptions opts;
  if (!cache_dir.empty())
    opts.cache_dir = cache_dir;
  else if (const char* env = std::getenv("FFEXP_CACHE_DIR"))
    opts.cache_dir = env;
  opts.threads = threads;
  opts.exact = exact;
  if (!out.empty())
    opts.out = out;
  if (!plot.empty())
    opts.plot_data = plot;
  const std::string command = app.get_subcommands().front()->get_name();
  return ffexp::run_cli(command, config, opts, std::cout, std::cerr);
}
