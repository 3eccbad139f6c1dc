#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fedac {

/// Command-line entry point. `args` excludes the program name. Returns the
/// process exit code: 0 success, 1 usage, 2 data, 3 numerical, 4 verification.
/// Failures print one line `error: <kind>: <detail>` to `err`.
///
/// Output directory precedence: --out, then FEDAC_OUT_DIR, then the config's
/// out_dir, then "out". Config values: flags, then the file, then defaults.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace fedac
