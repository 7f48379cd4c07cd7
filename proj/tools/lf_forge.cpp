// lf-forge: leader-follower pair extraction, filtering and evaluation.
#include "lfforge/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"lf-forge: leader-follower pairs from mixed-traffic trajectories"};
  app.require_subcommand(1);
  lfforge::cli::Options opts;

  auto common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config, "run configuration (JSON)")->required();
    sub->add_option("--out", opts.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", opts.seed, "seed for folds and synthetic data");
    sub->add_option("--preset", opts.preset, "filter preset, approach1..approach4");
    sub->add_flag("--all", opts.all, "dossier: export every pair, not only flagged ones");
  };

  const std::vector<std::pair<std::string, std::string>> simple = {
      {"ingest", "grid-normalize a raw trajectory CSV"},
      {"thresholds", "desirable-gap table from the fundamental diagram"},
      {"pairs", "extract base leader-follower pairs"},
      {"filter", "run the filtering stages"},
      {"wavelet", "wavelet energy peaks and LV/SV matches"},
      {"eval", "k-fold regression before and after filtering"},
      {"synth", "labelled synthetic trajectories"},
      {"report", "markdown summary of the artifacts"},
  };
  for (const auto& [name, help] : simple) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    sub->callback([&opts, n = name] { opts.command = n; });
  }
  auto* dossier = app.add_subcommand("dossier", "per-pair JSON dossiers for review");
  common(dossier);
  dossier->callback([&opts] { opts.command = "dossier"; });

  auto* review = app.add_subcommand("review", "reviewer decisions");
  review->require_subcommand(1);
  auto* apply = review->add_subcommand("apply", "apply ReviewDecision JSON to retained_pairs.csv");
  common(apply);
  apply->add_option("--decisions", opts.decisions, "ReviewDecision JSON file")->required();
  apply->callback([&opts] { opts.command = "review-apply"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lfforge::cli::kExitConfig;
  }
  return lfforge::cli::run(opts, std::cout, std::cerr);
}
