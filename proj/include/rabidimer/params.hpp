#pragma once

#include <filesystem>
#include <string>

namespace rabidimer {

// Physical parameters of the dissipative Rabi dimer.  Energies are in units
// of the photon frequency omega0, times in 1/omega0.
struct ModelParams {
    double delta = 1.0;       // qubit splitting
    double omega0 = 1.0;      // photon frequency (unit of energy, must stay 1)
    double g = 0.0;           // qubit-photon coupling
    double j_tunnel = 0.0;    // photon tunneling between the two resonators
    double alpha = 0.0;       // Kondo parameter of the common bath
    double s_exp = 0.5;       // spectral exponent (sub-Ohmic for s < 1)
    double omega_c = 1.0;     // bath cutoff frequency
    double omega_max = 20.0;  // upper edge of the discretized bath band
    int n_bath = 60;          // number of discretized bath modes
    double n_photon_init = 20.0;  // initial left-resonator photon number N(0)
    int multiplicity = 1;     // number of coherent-product branches M

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    // Applies one key=value assignment (config-file syntax).  Unknown keys
    // throw std::invalid_argument.
    void apply_key(const std::string& key, const std::string& value);
};

// Integration controls shared by every driver.
struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double dt_init = 1e-3;
    double dt_max = 1e-2;
    double t_end = 1.0;
    double sample_interval = 0.0;  // 0 -> t_end / 600
    void validate() const;
    void apply_key(const std::string& key, const std::string& value);
    double effective_sample_interval() const;
};

// Plain key=value file, '#' comments, blank lines ignored.  Keys may belong
// to either struct; unknown keys throw.
void load_config_file(const std::filesystem::path& file, ModelParams& mp,
                      IntegratorConfig& ic);

}  // namespace rabidimer
