#include "rabidimer/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rabidimer {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double parse_double(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric value for '" + key + "': " + value);
    }
    if (pos != value.size() || !std::isfinite(v))
        throw std::invalid_argument("bad numeric value for '" + key + "': " + value);
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    double v = parse_double(key, value);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("expected integer for '" + key + "': " + value);
    return i;
}

}  // namespace

void ModelParams::validate() const {
    require(std::isfinite(delta) && delta >= 0.0, "delta must be >= 0");
    require(omega0 == 1.0, "omega0 fixes the unit system and must be 1");
    require(std::isfinite(g), "g must be finite");
    require(std::isfinite(j_tunnel), "j_tunnel must be finite");
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
    require(s_exp > 0.0 && s_exp < 1.0, "s_exp must lie in (0,1)");
    require(omega_c > 0.0, "omega_c must be > 0");
    require(omega_max > omega_c, "omega_max must exceed omega_c");
    require(n_bath >= 0, "n_bath must be >= 0");
    require(n_photon_init >= 0.0, "n_photon_init must be >= 0");
    require(multiplicity >= 1, "multiplicity must be >= 1");
}

void ModelParams::apply_key(const std::string& key, const std::string& value) {
    if (key == "delta") delta = parse_double(key, value);
    else if (key == "omega0") omega0 = parse_double(key, value);
    else if (key == "g") g = parse_double(key, value);
    else if (key == "j_tunnel") j_tunnel = parse_double(key, value);
    else if (key == "alpha") alpha = parse_double(key, value);
    else if (key == "s_exp") s_exp = parse_double(key, value);
    else if (key == "omega_c") omega_c = parse_double(key, value);
    else if (key == "omega_max") omega_max = parse_double(key, value);
    else if (key == "n_bath") n_bath = parse_int(key, value);
    else if (key == "n_photon_init") n_photon_init = parse_double(key, value);
    else if (key == "multiplicity") multiplicity = parse_int(key, value);
    else throw std::invalid_argument("unknown model key '" + key + "'");
}

void IntegratorConfig::validate() const {
    require(rel_tol > 0.0, "rel_tol must be > 0");
    require(abs_tol > 0.0, "abs_tol must be > 0");
    require(dt_init > 0.0, "dt_init must be > 0");
    require(dt_max >= dt_init, "dt_max must be >= dt_init");
    require(t_end >= 0.0, "t_end must be >= 0");
    require(sample_interval >= 0.0, "sample_interval must be >= 0");
}

void IntegratorConfig::apply_key(const std::string& key, const std::string& value) {
    if (key == "rel_tol") rel_tol = parse_double(key, value);
    else if (key == "abs_tol") abs_tol = parse_double(key, value);
    else if (key == "dt_init") dt_init = parse_double(key, value);
    else if (key == "dt_max") dt_max = parse_double(key, value);
    else if (key == "t_end") t_end = parse_double(key, value);
    else if (key == "sample_interval") sample_interval = parse_double(key, value);
    else throw std::invalid_argument("unknown integrator key '" + key + "'");
}

double IntegratorConfig::effective_sample_interval() const {
    if (sample_interval > 0.0) return sample_interval;
    return t_end > 0.0 ? t_end / 600.0 : 1.0;
}

void load_config_file(const std::filesystem::path& file, ModelParams& mp,
                      IntegratorConfig& ic) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file: " + file.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string key, value;
        std::istringstream ls(line);
        if (!std::getline(ls, key, '=')) continue;  // blank line
        auto trim = [](std::string& s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        if (key.empty()) continue;
        if (!std::getline(ls, value))
            throw std::invalid_argument(file.string() + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        trim(value);
        try {
            mp.apply_key(key, value);
        } catch (const std::invalid_argument& model_err) {
            std::string what = model_err.what();
            if (what.rfind("unknown model key", 0) != 0) throw;
            try {
                ic.apply_key(key, value);
            } catch (const std::invalid_argument& integ_err) {
                std::string what2 = integ_err.what();
                if (what2.rfind("unknown integrator key", 0) != 0) throw;
                throw std::invalid_argument(file.string() + ":" + std::to_string(lineno) +
                                            ": unknown key '" + key + "'");
            }
        }
    }
}

}  // namespace rabidimer
