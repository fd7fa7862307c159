#include "rabidimer/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rabidimer {

namespace {

constexpr const char* kSeriesHeader = "t,t_J,N_L,N_R,Z,Z_norm,sz_L,sz_R,norm,energy";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_for_write(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
    return out;
}

}  // namespace

void write_series(const std::filesystem::path& file,
                  const std::vector<TimeSeriesRecord>& records) {
    auto out = open_for_write(file);
    out << kSeriesHeader << '\n';
    for (const auto& r : records) {
        out << fmt(r.t) << ',' << fmt(r.t_j) << ',' << fmt(r.n_left) << ','
            << fmt(r.n_right) << ',' << fmt(r.z) << ',' << fmt(r.z_norm) << ','
            << fmt(r.sz_left) << ',' << fmt(r.sz_right) << ',' << fmt(r.norm) << ','
            << fmt(r.energy) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::vector<TimeSeriesRecord> read_series(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open: " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != kSeriesHeader)
        throw std::runtime_error("unexpected series header in " + file.string());
    std::vector<TimeSeriesRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        TimeSeriesRecord r{};
        double* fields[] = {&r.t, &r.t_j, &r.n_left, &r.n_right, &r.z,
                            &r.z_norm, &r.sz_left, &r.sz_right, &r.norm, &r.energy};
        std::string cell;
        for (double* f : fields) {
            if (!std::getline(ls, cell, ','))
                throw std::runtime_error("short series row in " + file.string());
            *f = std::stod(cell);
        }
        out.push_back(r);
    }
    return out;
}

void write_bath_map(const std::filesystem::path& file,
                    const std::vector<BathFrame>& frames,
                    const std::vector<double>& omega) {
    auto out = open_for_write(file);
    out << 't';
    for (double w : omega) out << ',' << fmt(w);
    out << '\n';
    for (const auto& f : frames) {
        if (f.populations.size() != static_cast<long>(omega.size()))
            throw std::invalid_argument("write_bath_map: frame size mismatch");
        out << fmt(f.t);
        for (long k = 0; k < f.populations.size(); ++k) out << ',' << fmt(f.populations(k));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_diagnostics(const std::filesystem::path& file,
                       const std::vector<DiagnosticsRow>& rows) {
    auto out = open_for_write(file);
    out << "t,dt,cond_estimate,shift,residual\n";
    for (const auto& r : rows)
        out << fmt(r.t) << ',' << fmt(r.dt) << ',' << fmt(r.cond_estimate) << ','
            << fmt(r.shift) << ',' << fmt(r.residual) << '\n';
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_metadata(const std::filesystem::path& file, const RunMetadata& meta,
                    const BathDiscretization& bath) {
    nlohmann::ordered_json j;
    j["preset"] = meta.preset;
    j["params"] = {{"delta", meta.params.delta},
                   {"omega0", meta.params.omega0},
                   {"g", meta.params.g},
                   {"j_tunnel", meta.params.j_tunnel},
                   {"alpha", meta.params.alpha},
                   {"s_exp", meta.params.s_exp},
                   {"omega_c", meta.params.omega_c},
                   {"omega_max", meta.params.omega_max},
                   {"n_bath", meta.params.n_bath},
                   {"n_photon_init", meta.params.n_photon_init},
                   {"multiplicity", meta.params.multiplicity}};
    j["integrator"] = {{"rel_tol", meta.integ.rel_tol},
                       {"abs_tol", meta.integ.abs_tol},
                       {"dt_init", meta.integ.dt_init},
                       {"dt_max", meta.integ.dt_max},
                       {"t_end", meta.integ.t_end},
                       {"sample_interval", meta.integ.sample_interval}};
    j["seed"] = meta.seed;
    j["bath"] = {{"omega", bath.omega}, {"phi", bath.phi}};
    j["steps"] = {{"accepted", meta.accepted_steps}, {"rejected", meta.rejected_steps}};
    auto out = open_for_write(file);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

RunMetadata read_metadata(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open: " + file.string());
    nlohmann::json j;
    in >> j;
    RunMetadata m;
    m.preset = j.at("preset").get<std::string>();
    const auto& p = j.at("params");
    m.params.delta = p.at("delta").get<double>();
    m.params.omega0 = p.at("omega0").get<double>();
    m.params.g = p.at("g").get<double>();
    m.params.j_tunnel = p.at("j_tunnel").get<double>();
    m.params.alpha = p.at("alpha").get<double>();
    m.params.s_exp = p.at("s_exp").get<double>();
    m.params.omega_c = p.at("omega_c").get<double>();
    m.params.omega_max = p.at("omega_max").get<double>();
    m.params.n_bath = p.at("n_bath").get<int>();
    m.params.n_photon_init = p.at("n_photon_init").get<double>();
    m.params.multiplicity = p.at("multiplicity").get<int>();
    const auto& ic = j.at("integrator");
    m.integ.rel_tol = ic.at("rel_tol").get<double>();
    m.integ.abs_tol = ic.at("abs_tol").get<double>();
    m.integ.dt_init = ic.at("dt_init").get<double>();
    m.integ.dt_max = ic.at("dt_max").get<double>();
    m.integ.t_end = ic.at("t_end").get<double>();
    m.integ.sample_interval = ic.at("sample_interval").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.accepted_steps = j.at("steps").at("accepted").get<long>();
    m.rejected_steps = j.at("steps").at("rejected").get<long>();
    return m;
}

}  // namespace rabidimer
