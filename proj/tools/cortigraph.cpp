#include "cortigraph/parallel.hpp"
#include "cortigraph/pipeline.hpp"

#include <CLI11.hpp>

#include <string>

int main(int argc, char** argv) {
  cortigraph::apply_thread_limit();

  CLI::App app{"EEG scout connectivity and graph-feature pipeline"};
  app.require_subcommand(1, 1);

  cortigraph::pipeline::RunOptions opts;
  std::string config, stimulus, sweep, dump;
  double rho_th = 0.0;
  std::uint64_t seed = 0;

  for (const auto& name : cortigraph::pipeline::commands()) {
    auto* sub = app.add_subcommand(name, "run the pipeline through the " + name + " stage");
    sub->add_option("--config", config, "pipeline configuration JSON")->check(CLI::ExistingFile);
    sub->add_option("--input", opts.input, "input directory with epoch sets, leadfield.csv and atlas.json")->required();
    sub->add_option("--out", opts.out, "output directory")->required();
    sub->add_option("--stimulus", stimulus, "only use epoch sets of this stimulus")
        ->check(CLI::IsMember({"A", "V", "AV", "A50V", "V50A"}));
    sub->add_option("--band", opts.band, "frequency band for PLV")->check(CLI::IsMember({"theta", "alpha", "beta", "gamma"}));
    sub->add_option("--rho-th", rho_th, "correlation threshold for binary graphs");
    sub->add_option("--sweep", sweep, "threshold sweep LO:HI:STEP (classify)");
    sub->add_option("--seed", seed, "master random seed");
    sub->add_option("--metric", opts.metric, "connectivity metric")->check(CLI::IsMember({"pearson", "plv"}));
    sub->add_flag("--group-by-subject", opts.group_by_subject, "keep all epochs of a subject in one fold");
    sub->add_option("--dump-sources", dump, "also write per-epoch scout series here (sources)");
    sub->add_option("--average", opts.average, "connectivity averaging: per-epoch matrices or epoch-averaged series")
        ->check(CLI::IsMember({"epochs", "series"}));
  }

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (!config.empty()) opts.config = config;
  if (!stimulus.empty()) opts.stimulus = stimulus;
  if (!sweep.empty()) opts.sweep = sweep;
  if (!dump.empty()) opts.dump_sources = dump;
  if (sub->count("--rho-th")) opts.rho_th = rho_th;
  if (sub->count("--seed")) opts.seed = seed;

  return cortigraph::pipeline::run_pipeline(opts);
}
