// wedgescope: experiment runner over the libwedgescope C API.

#include "wedgescope/wedgescope.h"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int exit_code(ws_status s) {
  if (s == WS_OK) return kExitOk;
  return s == WS_ERR_NUMERICAL ? kExitNumerical : kExitConfig;
}

// Splits the JSON array of names returned by the library; names never contain quotes.
std::vector<std::string> subcommand_names() {
  char* json = nullptr;
  std::vector<std::string> names;
  if (ws_experiment_names(&json) != WS_OK) return names;
  const std::string text(json);
  ws_string_free(json);
  std::size_t pos = 0;
  while ((pos = text.find('"', pos)) != std::string::npos) {
    const auto end = text.find('"', pos + 1);
    names.push_back(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

const char* describe(const std::string& name) {
  static const std::pair<const char*, const char*> table[] = {
      {"toy-optimize", "minimize the toy wedge loss from a seeded random start"},
      {"hyperplane-sweep", "success rate of optimization restricted to random d-dim hyperplanes"},
      {"tunnel", "linear barrier and optimized low-loss tunnel between two optima"},
      {"m-connector", "optimized barycentric grid over the hull of m+1 optima"},
      {"probe-width", "radial first-passage distances around a low-loss point"},
      {"short-dirs", "short-direction count (exact on the toy, FD Hessian otherwise)"},
      {"train-net", "train one tiny MLP and save a checkpoint"},
      {"barrier", "loss along the straight line between two optima"},
      {"swa-compare", "weight averaging versus prediction averaging of cyclical snapshots"},
      {"deviation-cosines", "pairwise cosines of tunnel deviations"},
      {"prediction-profile", "label disagreement along a network tunnel"},
      {"sweep", "grid over one or two config keys of another subcommand"},
  };
  for (const auto& [n, d] : table)
    if (name == n) return d;
  return "";
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wedgescope: loss-landscape geometry experiments (toy wedge model and tiny MLPs)"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool quiet = false;

  for (const auto& name : subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", output_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "master seed (overrides seed)");
    sub->add_option("--jobs", jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", quiet, "no progress messages on stderr");
  }

  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    std::cerr << "error: unknown subcommand '" << argv[1] << "'\n" << app.help();
    return kExitConfig;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  std::string config;
  if (!read_file(config_path, config)) {
    std::cerr << "error: cannot read config " << config_path << '\n';
    return kExitConfig;
  }

  ws_run_options options{};
  options.output_dir = output_dir.empty() ? nullptr : output_dir.c_str();
  options.has_seed = chosen->count("--seed") > 0 ? 1 : 0;
  options.seed = seed;
  options.jobs = jobs;
  options.quiet = quiet ? 1 : 0;

  char* summary = nullptr;
  const ws_status status = ws_experiment_run(chosen->get_name().c_str(), config.c_str(), &options, &summary);
  if (status != WS_OK) {
    std::cerr << "error: " << ws_last_error();
    if (status == WS_ERR_NUMERICAL && ws_last_error_step() >= 0) std::cerr << " (step " << ws_last_error_step() << ')';
    std::cerr << '\n';
    return exit_code(status);
  }
  std::cout << summary << '\n';
  ws_string_free(summary);
  return kExitOk;
}
