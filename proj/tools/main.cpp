#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <perturbex/harness.hpp>

int main(int argc, char** argv) {
  CLI::App app{"perturbex: certified perturbation expansions for strongly convex problems"};
  app.require_subcommand(1);

  perturbex::RunOptions opts;
  std::uint64_t seed = 0;
  std::string constants;

  const std::map<std::string, std::string> help{
      {"certify", "solve, estimate constants, expand and verify every requested order"},
      {"scaling", "residuals and log-log slopes over the eps grid"},
      {"ridge-sweep", "ridge bias bounds over the lambda grid"},
      {"selftest", "closed-form checks, auxiliary lemma suite and Taylor diagnostics"},
  };
  std::map<CLI::App*, std::string> subs;
  for (const auto& [name, text] : help) {
    CLI::App* sub = app.add_subcommand(name, text);
    auto* cfg = sub->add_option("--config", opts.config_path, "experiment JSON")->check(CLI::ExistingFile);
    if (name != "selftest") cfg->required();
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the certificate seed");
    sub->add_flag("--require-gates", opts.require_gates, "exit 3 when a gate fails");
    sub->add_option("--constants", constants, "constants table JSON")->check(CLI::ExistingFile);
    subs[sub] = name;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : perturbex::kExitError;
  }

  for (const auto& [sub, name] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) opts.seed = seed;
    if (!constants.empty()) opts.constants_path = constants;
    if (name == "certify") return perturbex::cmd_certify(opts);
    if (name == "scaling") return perturbex::cmd_scaling(opts);
    if (name == "ridge-sweep") return perturbex::cmd_ridge_sweep(opts);
    return perturbex::cmd_selftest(opts);
  }
  return perturbex::kExitError;
}
