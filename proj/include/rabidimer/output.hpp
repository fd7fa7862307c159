#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rabidimer/bath.hpp"
#include "rabidimer/integrator.hpp"
#include "rabidimer/params.hpp"

namespace rabidimer {

// series.csv: fixed column order, 17 significant digits (exact double
// round-trip).
void write_series(const std::filesystem::path& file,
                  const std::vector<TimeSeriesRecord>& records);
std::vector<TimeSeriesRecord> read_series(const std::filesystem::path& file);

// bath.csv: first row "t" plus the mode frequencies, then one row per
// sample: t, N_k...
void write_bath_map(const std::filesystem::path& file,
                    const std::vector<BathFrame>& frames,
                    const std::vector<double>& omega);

void write_diagnostics(const std::filesystem::path& file,
                       const std::vector<DiagnosticsRow>& rows);

// Everything needed to reproduce the run bit-for-bit, plus step counters.
// Deliberately contains no timestamps or host details.
struct RunMetadata {
    std::string preset;  // may be empty
    ModelParams params;
    IntegratorConfig integ;
    std::uint64_t seed = 0;
    long accepted_steps = 0;
    long rejected_steps = 0;
};
void write_metadata(const std::filesystem::path& file, const RunMetadata& meta,
                    const BathDiscretization& bath);
RunMetadata read_metadata(const std::filesystem::path& file);

}  // namespace rabidimer
