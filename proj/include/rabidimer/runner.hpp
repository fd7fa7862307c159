#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rabidimer/params.hpp"

namespace rabidimer {

// Fully resolved description of what the tool should do.  Precedence while
// resolving: explicit flags > config file > preset > built-in defaults.
struct RunSpec {
    std::string preset;           // "", "case1", "case2" or "case3"
    ModelParams params;
    IntegratorConfig integ;
    std::vector<double> alphas;   // one entry per run; singleton unless sweeping
    std::filesystem::path out_dir = "runs";
    std::uint64_t seed = 1;
    bool validate = false;
    bool diagnostics = false;
    int jobs = 1;
};

// Applies one of the three standard operating points (tunneling and coupling
// strengths, horizon covering t*J = 3, six branches).
void apply_preset(const std::string& name, ModelParams& p, IntegratorConfig& ic);

struct ParseResult {
    std::optional<RunSpec> spec;  // engaged iff the tool should run
    int exit_code = 0;            // meaningful when spec is empty
    std::string message;          // help or error text
};

// Does not touch the process; exit-code semantics: 2 for usage errors (or no
// arguments at all), 0 with empty spec for --help.
ParseResult parse_args(const std::vector<std::string>& args);

std::string usage_text();

// Runs the spec to completion: one output directory per alpha under
// out_dir, or the validation suite when spec.validate is set.  Returns the
// process exit code.
int execute(const RunSpec& spec);

}  // namespace rabidimer
