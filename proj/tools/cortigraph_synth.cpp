// Writes a planted two-group fixture (leadfield, atlas, epoch sets) for
// trying the pipeline without recordings.
#include "cortigraph/error.hpp"
#include "cortigraph/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"synthetic EEG fixture generator"};
  std::string out;
  std::uint64_t seed = 42;
  cortigraph::synth::FixtureSpec spec;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--seed", seed, "random seed");
  app.add_option("--epochs", spec.epochs.n_epochs, "epochs per group");
  app.add_option("--samples", spec.epochs.n_samples, "samples per epoch");
  app.add_option("--channels", spec.n_channels, "sensor count");
  app.add_option("--stimulus", spec.epochs.stimulus, "stimulus label")->check(CLI::IsMember({"A", "V", "AV", "A50V", "V50A"}));
  app.add_option("--groups", spec.groups, "group labels");
  app.add_option("--couplings", spec.couplings, "shared-driver coupling per group");
  CLI11_PARSE(app, argc, argv);

  try {
    cortigraph::synth::write_fixture(out, spec, seed);
  } catch (const cortigraph::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  return 0;
}
