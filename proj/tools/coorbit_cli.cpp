// coorbit: batch front end for transforms, certificates, lattice design,
// frame bounds and Neumann reconstruction.
//
// Every run is described by a flat key set. Values come from the command's
// defaults, then --config <file>, then --key value overrides (values are read
// as JSON when they parse, otherwise as strings; "a.b" addresses a nested
// field). Outputs go to --out-dir.
//
// Exit codes: 0 success/pass, 1 usage or configuration error, 2 I/O,
// 3 certification failure or inadmissible atom, 4 numerical divergence.

#include "coorbit/coorbit.hpp"
#include "coorbit/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace coorbit;
namespace cio = coorbit::io;
using cio::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kCertification = 3, kDivergence = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Certification failures carry their exit code through the dispatcher.
struct Verdict {
    int code;
};

const json kGrid = {{"t0", -8.0}, {"dt", 0.03125}, {"n", 512}};
const json kQuadrature = {{"b_lo", -8.0}, {"b_hi", 8.0}, {"n_b", 512}, {"a_min", 0.25}, {"a_max", 4.0}, {"n_scales", 25}, {"signs", {1, -1}}};
const json kXGrid = {{"origin", -8.0}, {"step", 0.25}, {"count", 65}};
const json kOmegaGrid = {{"origin", -4.0}, {"step", 0.125}, {"count", 65}};
const json kBand = {{"centre_lo", -4.0}, {"centre_hi", 4.0}, {"freq_lo", 0.1}, {"freq_hi", 1.0},
                    {"width_lo", 0.5},   {"width_hi", 2.0},  {"packets", 3}};

json defaults_for(const std::string& cmd) {
    json d{{"version", cio::kVersion}, {"command", cmd}, {"seed", 0}, {"out_dir", "."}};
    const json affine_u = {{"beta", 0.25}, {"alpha", 1.25}, {"density", kDefaultNeighborhoodDensity}};
    if (cmd == "cwt") {
        d.update({{"signal", "wavelet"}, {"wavelet", "builtin:mexican_hat"}, {"normalize", true}, {"grid", kGrid},
                  {"quadrature", kQuadrature}, {"m", {{"family", "m"}, {"s", 0.0}}}, {"band", kBand}, {"output", "cwt.json"}});
    } else if (cmd == "stft") {
        d.update({{"signal", "window"}, {"window", "builtin:gaussian"}, {"grid", kGrid}, {"x_grid", kXGrid},
                  {"omega_grid", kOmegaGrid}, {"m", {{"family", "v"}, {"r", 0.0}, {"s", 0.0}}}, {"band", kBand},
                  {"output", "stft.json"}});
    } else if (cmd == "admissibility") {
        d.update({{"wavelet", "builtin:mexican_hat"}, {"grid", kGrid}, {"output", "admissibility.json"}});
    } else if (cmd == "moments") {
        d.update({{"signal", "builtin:mexican_hat"}, {"grid", kGrid}, {"k_max", kDefaultMomentOrder}, {"tol", 1e-6},
                  {"band", kBand}, {"output", "moments.json"}});
    } else if (cmd == "certify-atom") {
        d.update({{"mode", "wavelet"}, {"wavelet", "builtin:mexican_hat"}, {"window", "builtin:gaussian"}, {"normalize", true},
                  {"grid", kGrid}, {"sufficiency_grid", nullptr}, {"quadrature", kQuadrature}, {"x_grid", kXGrid},
                  {"omega_grid", kOmegaGrid}, {"w", nullptr}, {"U", nullptr}, {"rho", 1.0}, {"r", 0.0}, {"s", 0.0},
                  {"tol", kMomentTolerance}, {"output", "certificate.json"}});
        d["U"] = affine_u;
    } else if (cmd == "design-lattice") {
        d.update({{"wavelet", "builtin:smooth_bandpass"}, {"normalize", true}, {"grid", kGrid}, {"sufficiency_grid", nullptr},
                  {"quadrature", kQuadrature}, {"w", {{"family", "w"}, {"rho", 1.0}}},
                  {"schedule", {{"alpha0", 2.0}, {"beta0", 1.0}, {"gamma", 0.7}, {"cap", 32}}}, {"output", "design.json"},
                  {"lattice_output", "lattice.json"}});
    } else if (cmd == "frame-bounds") {
        d.update({{"mode", "wavelet"}, {"wavelet", "builtin:mexican_hat"}, {"window", "builtin:gaussian"}, {"normalize", true},
                  {"grid", kGrid}, {"quadrature", kQuadrature}, {"x_grid", kXGrid}, {"omega_grid", kOmegaGrid},
                  {"lattice", nullptr}, {"U", nullptr}, {"p", 2.0}, {"m", nullptr}, {"ensemble", 20}, {"band", kBand},
                  {"output", "bounds.json"}});
    } else if (cmd == "reconstruct") {
        d.update({{"wavelet", "builtin:smooth_bandpass"}, {"normalize", true}, {"grid", kGrid}, {"quadrature", kQuadrature},
                  {"lattice", nullptr}, {"U", affine_u}, {"w", {{"family", "w"}, {"rho", 1.0}}}, {"samples", nullptr},
                  {"field", nullptr}, {"truth", nullptr}, {"tol", 1e-3}, {"max_iter", 100}, {"override_certificate", false},
                  {"output", "reconstruction.json"}, {"field_output", "reconstructed.json"}});
    } else {
        throw UsageError("unknown command " + cmd);
    }
    return d;
}

// --- configuration ---------------------------------------------------------

json parse_value(const std::string& s) {
    try {
        return json::parse(s);
    } catch (const json::parse_error&) {
        return s;
    }
}

void merge(json& cfg, const json& src, const std::string& where) {
    for (const auto& [k, v] : src.items()) {
        if (!cfg.contains(k)) throw UsageError(where + ": unknown key \"" + k + "\"");
        cfg[k] = v;
    }
}

void apply_override(json& cfg, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        merge(cfg, json{{key, parse_value(value)}}, "--" + key);
        return;
    }
    const auto head = key.substr(0, dot), tail = key.substr(dot + 1);
    if (!cfg.contains(head) || !cfg[head].is_object() || !cfg[head].contains(tail))
        throw UsageError("--" + key + ": unknown key");
    cfg[head][tail] = parse_value(value);
}

json build_config(const std::string& cmd, const std::string& config_path, const std::vector<std::string>& extras,
                  const std::optional<long long>& seed, const std::optional<std::string>& out_dir) {
    json cfg = defaults_for(cmd);
    if (!config_path.empty()) {
        const json file = cio::read_json(config_path);
        if (!file.is_object()) throw cio::FormatError(config_path + ": configuration must be a JSON object");
        cio::check_version(file);
        if (file.contains("command") && file.at("command") != cmd)
            throw UsageError(config_path + ": configuration is for command " + file.at("command").dump());
        merge(cfg, file, config_path);
    }
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const auto& a = extras[i];
        if (a.rfind("--", 0) != 0 || a.size() == 2) throw UsageError("unexpected argument " + a);
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            apply_override(cfg, a.substr(2, eq - 2), a.substr(eq + 1));
        } else {
            if (i + 1 >= extras.size()) throw UsageError(a + " needs a value");
            apply_override(cfg, a.substr(2), extras[++i]);
        }
    }
    if (seed) cfg["seed"] = *seed;
    if (out_dir) cfg["out_dir"] = *out_dir;
    if (cfg.at("version") != cio::kVersion) throw cio::FormatError("unsupported version " + cfg.at("version").dump());
    return cfg;
}

// --- inputs ----------------------------------------------------------------

SignalGrid grid_of(const json& j) { return {j.at("t0").get<double>(), j.at("dt").get<double>(), j.at("n").get<int>()}; }

WavePacketBand band_of(const json& j) {
    WavePacketBand b;
    b.centre_lo = j.at("centre_lo");
    b.centre_hi = j.at("centre_hi");
    b.freq_lo = j.at("freq_lo");
    b.freq_hi = j.at("freq_hi");
    b.width_lo = j.at("width_lo");
    b.width_hi = j.at("width_hi");
    b.packets = j.at("packets");
    return b;
}

/// "builtin:<name>" is synthesized on the configured grid; anything else is a
/// signal file.
SampledSignal load_signal(const json& cfg, const std::string& key, const std::string& grid_key = "grid") {
    const auto spec = cfg.at(key).get<std::string>();
    const std::string prefix = "builtin:";
    if (spec.rfind(prefix, 0) != 0) return cio::signal_from_json(cio::read_json(spec));
    const auto name = spec.substr(prefix.size());
    const auto g = grid_of(cfg.at(grid_key));
    if (name == "mexican_hat") return mexican_hat(g);
    if (name == "gaussian") return gaussian(g);
    if (name == "haar") return haar_wavelet(g);
    if (name == "smooth_bandpass") return smooth_bandpass_atom(g);
    if (name == "wave_packets") {
        std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
        return random_wave_packets(g, rng, band_of(cfg.at("band")));
    }
    throw UsageError(key + ": unknown builtin \"" + name + "\"");
}

/// Inadmissible atoms are a certification outcome, not an error.
SampledSignal checked_wavelet(const json& cfg, const std::string& grid_key = "grid") {
    auto psi = load_signal(cfg, "wavelet", grid_key);
    const auto adm = admissibility_constant(psi);
    if (!adm.admissible || !(adm.constant > 0)) {
        std::cerr << "coorbit: wavelet is not admissible (dc ratio " << adm.dc_ratio << ")\n";
        throw Verdict{kCertification};
    }
    return cfg.value("normalize", true) ? normalize_admissible(psi) : psi;
}

template <class T>
T object_or_file(const json& cfg, const std::string& key, T (*from)(const json&)) {
    const auto& v = cfg.at(key);
    if (v.is_null()) throw UsageError(key + " is required");
    return from(v.is_string() ? cio::read_json(v.get<std::string>()) : v);
}

std::string out_path(const json& cfg, const std::string& key) {
    const std::filesystem::path dir = cfg.at("out_dir").get<std::string>();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw cio::IoError("cannot create " + dir.string() + ": " + ec.message());
    return (dir / cfg.at(key).get<std::string>()).string();
}

std::string sidecar_path(const std::string& main) {
    std::filesystem::path p(main);
    return (p.parent_path() / (p.stem().string() + ".stats.json")).string();
}

void write(const std::string& path, const json& doc) { cio::write_json(path, cio::versioned(doc)); }

template <Field F>
json stats_of(const F& f, const WeightSpec& m) {
    return {{"kind", "stats"}, {"m", cio::to_json(m)}, {"lpm_norm", {{"1", lpm_norm(f, 1, m)}, {"2", lpm_norm(f, 2, m)},
            {"inf", lpm_norm(f, std::numeric_limits<double>::infinity(), m)}}}};
}

// --- commands --------------------------------------------------------------

int cmd_cwt(const json& cfg) {
    const auto psi = checked_wavelet(cfg);
    const auto f = cfg.at("signal") == "wavelet" ? psi : load_signal(cfg, "signal");
    const auto quad = cio::affine_quadrature_from_json(cfg.at("quadrature"));
    const auto w = cwt(f, psi, quad);
    const auto path = out_path(cfg, "output");
    write(path, cio::to_json(w));
    write(sidecar_path(path), stats_of(w, cio::weight_from_json(cfg.at("m"))));
    return kOk;
}

int cmd_stft(const json& cfg) {
    const auto g = load_signal(cfg, "window");
    const auto f = cfg.at("signal") == "window" ? g : load_signal(cfg, "signal");
    const auto v = stft(f, g, cio::grid_from_json(cfg.at("x_grid")), cio::grid_from_json(cfg.at("omega_grid")));
    const auto path = out_path(cfg, "output");
    write(path, cio::to_json(v));
    write(sidecar_path(path), stats_of(v, cio::weight_from_json(cfg.at("m"))));
    return kOk;
}

int cmd_admissibility(const json& cfg) {
    const auto adm = admissibility_constant(load_signal(cfg, "wavelet"));
    write(out_path(cfg, "output"),
          {{"kind", "admissibility"}, {"admissible", adm.admissible}, {"constant", adm.constant}, {"dc_ratio", adm.dc_ratio}});
    if (!adm.admissible) std::cerr << "coorbit: wavelet is not admissible (dc ratio " << adm.dc_ratio << ")\n";
    return adm.admissible ? kOk : kCertification;
}

int cmd_moments(const json& cfg) {
    const auto f = load_signal(cfg, "signal");
    const int k_max = cfg.at("k_max");
    const auto m = moments(f, k_max);
    json re = json::array(), im = json::array();
    for (const auto& z : m.moments) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    write(out_path(cfg, "output"), {{"kind", "moments"},
                                    {"re", re},
                                    {"im", im},
                                    {"abs_moments", m.abs_moments},
                                    {"window", {m.window_lo, m.window_hi}},
                                    {"vanishing_moments", vanishing_moment_count(f, cfg.at("tol"), k_max)}});
    return kOk;
}

int cmd_certify(const json& cfg) {
    const auto mode = cfg.at("mode").get<std::string>();
    const auto path = out_path(cfg, "output");
    const auto suff_path = (std::filesystem::path(path).parent_path() / "sufficiency.json").string();
    FrameCertificate cert;
    bool sufficient = false;
    if (mode == "wavelet") {
        const auto psi = checked_wavelet(cfg);
        const json w = cfg.at("w").is_null() ? json{{"family", "w"}, {"rho", cfg.at("rho")}} : cfg.at("w");
        const auto u = std::get<AffineNeighborhood>(cio::neighborhood_from_json(cfg.at("U")));
        cert = atom_certificate(psi, cio::affine_quadrature_from_json(cfg.at("quadrature")), cio::weight_from_json(w), u);
        const auto& atom = cfg.at("sufficiency_grid").is_null() ? psi : checked_wavelet(cfg, "sufficiency_grid");
        const auto rep = wavelet_atom_sufficient(atom, cfg.at("rho"), cfg.at("tol"));
        sufficient = rep.pass;
        write(suff_path, cio::to_json(rep));
    } else if (mode == "window") {
        const auto g = load_signal(cfg, "window");
        const json w = cfg.at("w").is_null() ? json{{"family", "v"}, {"r", cfg.at("r")}, {"s", cfg.at("s")}} : cfg.at("w");
        json uj = cfg.at("U");
        if (!uj.contains("beta_x")) uj = {{"beta_x", 0.25}, {"beta_omega", 0.25}};
        uj["type"] = "tf";
        const auto u = std::get<TFNeighborhood>(cio::neighborhood_from_json(uj));
        const auto k = tf_reproducing_kernel(g, cio::grid_from_json(cfg.at("x_grid")), cio::grid_from_json(cfg.at("omega_grid")));
        cert = atom_certificate(k, cio::weight_from_json(w), u);
        const auto rep = stft_window_sufficient(g, cfg.at("r"), cfg.at("s"));
        sufficient = rep.pass;
        write(suff_path, cio::to_json(rep));
    } else {
        throw UsageError("mode must be wavelet or window");
    }
    write(path, cio::to_json(cert));
    if (!cert.pass) std::cerr << "coorbit: certificate fails, q = " << cert.q << "\n";
    if (!sufficient) std::cerr << "coorbit: atom sufficiency test fails\n";
    return cert.pass && sufficient ? kOk : kCertification;
}

int cmd_design(const json& cfg) {
    const auto psi = checked_wavelet(cfg);
    const auto quad = cio::affine_quadrature_from_json(cfg.at("quadrature"));
    const auto w = cio::weight_from_json(cfg.at("w"));
    const auto& s = cfg.at("schedule");
    const DesignSchedule sched{s.at("alpha0"), s.at("beta0"), s.at("gamma"), s.at("cap")};
    DesignResult d;
    try {
        if (cfg.at("sufficiency_grid").is_null()) {
            d = design_lattice(psi, quad, w, sched);
        } else {
            // Moments of slowly decaying atoms are resolved on a wider grid
            // than the chart the kernel lives on.
            if (auto* sp = std::get_if<SymmetricPower>(&w.variant())) {
                const auto rep = wavelet_atom_sufficient(checked_wavelet(cfg, "sufficiency_grid"), sp->rho, kMomentTolerance);
                if (!rep.pass) {
                    std::cerr << "coorbit: wavelet has " << rep.vanishing_moments << " vanishing moments, too few for "
                              << w.describe() << "\n";
                    return kCertification;
                }
            }
            d = design_lattice(reproducing_kernel(psi, quad), w, sched);
        }
    } catch (const CoorbitError& e) {
        // DesignError, or too few vanishing moments for the weight.
        std::cerr << "coorbit: " << e.what() << "\n";
        return kCertification;
    }
    write(out_path(cfg, "lattice_output"), cio::to_json(d.lattice));
    write(out_path(cfg, "output"), cio::to_json(d));
    return kOk;
}

int cmd_bounds(const json& cfg) {
    const auto mode = cfg.at("mode").get<std::string>();
    const double p = cfg.at("p");
    const int ensemble = cfg.at("ensemble");
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const auto band = band_of(cfg.at("band"));
    FrameBoundsReport rep;
    if (mode == "wavelet") {
        const auto psi = checked_wavelet(cfg);
        const auto lat = object_or_file(cfg, "lattice", cio::affine_lattice_from_json);
        if (cfg.at("U").is_null()) throw UsageError("U is required");
        const auto u = std::get<AffineNeighborhood>(cio::neighborhood_from_json(cfg.at("U")));
        const auto m = cfg.at("m").is_null() ? WeightSpec::unit_affine() : cio::weight_from_json(cfg.at("m"));
        rep = frame_bounds_empirical(psi, cio::affine_quadrature_from_json(cfg.at("quadrature")), lat, u, p, m, ensemble, seed, band);
    } else if (mode == "gabor") {
        const auto g = load_signal(cfg, "window");
        const auto lat = object_or_file(cfg, "lattice", cio::tf_lattice_from_json);
        if (cfg.at("U").is_null()) throw UsageError("U is required");
        const auto u = std::get<TFNeighborhood>(cio::neighborhood_from_json(cfg.at("U")));
        const auto m = cfg.at("m").is_null() ? WeightSpec::unit_tf() : cio::weight_from_json(cfg.at("m"));
        rep = frame_bounds_empirical(g, cio::grid_from_json(cfg.at("x_grid")), cio::grid_from_json(cfg.at("omega_grid")), lat, u, p, m,
                                     ensemble, seed, band);
    } else {
        throw UsageError("mode must be wavelet or gabor");
    }
    write(out_path(cfg, "output"), cio::to_json(rep));
    return kOk;
}

int cmd_reconstruct(const json& cfg) {
    const auto psi = checked_wavelet(cfg);
    const auto quad = cio::affine_quadrature_from_json(cfg.at("quadrature"));
    const auto lat = object_or_file(cfg, "lattice", cio::affine_lattice_from_json);
    const auto u = std::get<AffineNeighborhood>(cio::neighborhood_from_json(cfg.at("U")));
    const auto kernel = reproducing_kernel(psi, quad);
    const auto cert = atom_certificate(kernel, cio::weight_from_json(cfg.at("w")), u);
    const auto bupu = build_bupu(lat, u, density_probe(lat, quad));
    const ConvolutionPlan plan(kernel, true);

    AffineSequence samples;
    if (!cfg.at("samples").is_null()) samples = cio::sequence_from_json(cio::read_json(cfg.at("samples")), lat);
    else if (!cfg.at("field").is_null()) samples = sample_field(cio::group_field_from_json(cio::read_json(cfg.at("field"))), lat);
    else throw UsageError("one of samples or field is required");
    std::optional<GroupField> truth;
    if (!cfg.at("truth").is_null()) truth = cio::group_field_from_json(cio::read_json(cfg.at("truth")));

    NeumannOptions opt;
    opt.tol = cfg.at("tol");
    opt.max_iter = cfg.at("max_iter");
    opt.override_certificate = cfg.at("override_certificate");
    opt.truth = truth ? &*truth : nullptr;
    if (!cert.pass && !opt.override_certificate) {
        std::cerr << "coorbit: certificate fails, q = " << cert.q << "\n";
        return kCertification;
    }
    try {
        const auto [f, rep] = neumann_reconstruct(samples, bupu, plan, cert, opt);
        write(out_path(cfg, "field_output"), cio::to_json(f));
        write(out_path(cfg, "output"), cio::to_json(rep));
        if (rep.converged) return kOk;
        std::cerr << "coorbit: no convergence in " << rep.iterations << " iterations, last residual "
                  << rep.residual_history.back() << "\n";
        return kDivergence;
    } catch (const DivergenceError& e) {
        write(out_path(cfg, "output"), cio::to_json(e.report));
        std::cerr << "coorbit: " << e.what() << "\nresidual history:";
        for (double r : e.report.residual_history) std::cerr << ' ' << r;
        std::cerr << '\n';
        return kDivergence;
    }
}

const std::map<std::string, int (*)(const json&)> kCommands = {
    {"cwt", cmd_cwt},         {"stft", cmd_stft},         {"admissibility", cmd_admissibility}, {"moments", cmd_moments},
    {"certify-atom", cmd_certify}, {"design-lattice", cmd_design}, {"frame-bounds", cmd_bounds}, {"reconstruct", cmd_reconstruct}};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coorbit: wavelet and Gabor coorbit toolkit"};
    app.require_subcommand(1);
    struct Opts {
        std::string config;
        std::optional<long long> seed;
        std::optional<std::string> out_dir;
    };
    std::map<std::string, Opts> opts;
    for (const auto& [name, fn] : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->allow_extras();
        auto& o = opts[name];
        sub->add_option("--config", o.config, "configuration file");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--out-dir", o.out_dir, "output directory");
    }
    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    const auto& o = opts[name];
    try {
        const json cfg = build_config(name, o.config, sub->remaining(), o.seed, o.out_dir);
        return kCommands.at(name)(cfg);
    } catch (const Verdict& v) {
        return v.code;
    } catch (const cio::IoError& e) {
        std::cerr << "coorbit: " << e.what() << "\n";
        return kIo;
    } catch (const UsageError& e) {
        std::cerr << "coorbit: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception& e) {
        std::cerr << "coorbit: bad configuration value: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "coorbit: " << e.what() << "\n";
        return kUsage;
    }
}
