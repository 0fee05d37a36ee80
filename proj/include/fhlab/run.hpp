#pragma once

// CLI entry point.  Parses the command line (subcommand plus --config,
// --seed, --replicates, --threads, --out), loads and strictly validates the
// JSON config, applies FHLAB_<SECTION>_<KEY> environment overrides, then
// dispatches the subcommand.  Returns the process exit code:
//   0 = all requested checks passed
//   1 = a check failed its tolerance (or a runtime failure occurred)
//   2 = configuration error (bad flags, unparseable/unknown/invalid config)
namespace fhlab::run {

int run_cli(int argc, const char* const* argv);

}  // namespace fhlab::run
