#include "momentlab/harness.hpp"

#include "momentlab/errors.hpp"
#include "momentlab/weyl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace momentlab::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::string engine_name(Engine e) {
    switch (e) {
    case Engine::hierarchy: return "hierarchy";
    case Engine::closed_form: return "closed_form";
    case Engine::gaussian: return "gaussian";
    case Engine::pde: return "pde";
    }
    return "unknown";
}

Engine parse_engine(const std::string& name) {
    if (name == "hierarchy") return Engine::hierarchy;
    if (name == "closed_form" || name == "closed-form") return Engine::closed_form;
    if (name == "gaussian") return Engine::gaussian;
    if (name == "pde") return Engine::pde;
    throw ValidationError("engines: unknown engine '" + name + "'");
}

// --- config parsing -----------------------------------------------------------

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw ValidationError(where + "." + key + " is required");
    return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where,
              std::optional<double> fallback = std::nullopt) {
    if (!obj.is_object() || !obj.contains(key)) {
        if (fallback) return *fallback;
        throw ValidationError(where + "." + key + " is required");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(where + "." + key + " must be finite");
    return d;
}

std::vector<std::pair<double, double>> pairs(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ValidationError(where + " must be an array of [t, omega] pairs");
    std::vector<std::pair<double, double>> out;
    for (const json& e : arr) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ValidationError(where + " entries must be [t, omega] pairs");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

FrequencyProfile parse_profile(const json& p, bool allow_inverted) {
    const std::string where = "potential.profile";
    const json& type = require(p, "type", where);
    if (!type.is_string()) throw ValidationError(where + ".type must be a string");
    const std::string t = type.get<std::string>();
    if (t == "constant") return FrequencyProfile::constant(number(p, "omega0", where), allow_inverted);
    if (t == "sinusoidal")
        return FrequencyProfile::sinusoidal(number(p, "omega0", where), number(p, "epsilon", where),
                                            number(p, "Omega", where), allow_inverted);
    if (t == "piecewise")
        return FrequencyProfile::piecewise(pairs(require(p, "breakpoints", where),
                                                 where + ".breakpoints"),
                                           allow_inverted);
    if (t == "tabulated")
        return FrequencyProfile::tabulated(pairs(require(p, "samples", where), where + ".samples"),
                                           allow_inverted);
    throw ValidationError(where + ".type must be one of constant, sinusoidal, piecewise, tabulated");
}

MomentState parse_moments(const json& arr, int n_max) {
    if (!arr.is_array()) throw ValidationError("initial.moments must be an array of layers");
    if (static_cast<int>(arr.size()) < n_max + 1)
        throw ValidationError("initial.moments must supply layers 0..run.n_max");
    std::vector<MomentLayer> layers;
    for (int n = 0; n <= n_max; ++n) {
        const json& row = arr[static_cast<std::size_t>(n)];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(n) + 1)
            throw ValidationError("initial.moments[" + std::to_string(n) + "] must have " +
                                  std::to_string(n + 1) + " entries");
        std::vector<double> v;
        for (const json& x : row) {
            if (!x.is_number()) throw ValidationError("initial.moments entries must be numbers");
            v.push_back(x.get<double>());
        }
        layers.emplace_back(n, std::move(v));
    }
    return MomentState(std::move(layers));
}

} // namespace

GridWavefunction load_wavefunction(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("initial.grid_file: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("initial.grid_file: " + std::string(e.what()));
    }
    GridSpec spec;
    spec.x_min = number(doc, "x_min", "grid_file");
    spec.x_max = number(doc, "x_max", "grid_file");
    const json& re = require(doc, "re", "grid_file");
    const json& im = require(doc, "im", "grid_file");
    if (!re.is_array() || !im.is_array() || re.size() != im.size())
        throw ValidationError("grid_file.re and grid_file.im must be arrays of equal length");
    spec.points = re.size();
    spec.validate();
    std::vector<std::complex<double>> psi(spec.points);
    for (std::size_t i = 0; i < spec.points; ++i)
        psi[i] = {re[i].get<double>(), im[i].get<double>()};
    GridWavefunction w(spec, std::move(psi));
    const double norm = w.norm();
    if (std::abs(norm - 1.0) > 1e-10)
        throw ValidationError("grid_file: wavefunction norm " + std::to_string(norm) +
                              " differs from 1 by more than 1e-10");
    return w;
}

void save_wavefunction(const GridWavefunction& w, const fs::path& path) {
    json doc;
    doc["x_min"] = w.spec().x_min;
    doc["x_max"] = w.spec().x_max;
    json re = json::array(), im = json::array();
    for (const auto& v : w.psi()) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    doc["re"] = std::move(re);
    doc["im"] = std::move(im);
    std::ofstream out(path);
    out << doc.dump() << '\n';
}

SimulationConfig parse_config(const json& doc, const GlobalOptions& global,
                              const fs::path& base_dir) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    SimulationConfig cfg;

    const json sys = doc.value("system", json::object());
    cfg.system.mass = number(sys, "m", "system", 1.0);
    cfg.system.hbar = number(sys, "hbar", "system", 1.0);
    cfg.system.validate();

    const json& pot = require(doc, "potential", "config");
    const bool allow_inverted = global.allow_inverted || pot.value("allow_inverted", false);
    cfg.potential.omega = parse_profile(require(pot, "profile", "potential"), allow_inverted);
    cfg.potential.V0 = number(pot, "V0", "potential", 0.0);
    cfg.potential.V4 = number(pot, "V4", "potential", 0.0);

    const json& run = require(doc, "run", "config");
    cfg.run.t0 = number(run, "t0", "run", 0.0);
    cfg.run.t1 = number(run, "t1", "run");
    cfg.run.dt = number(run, "dt", "run");
    if (!(cfg.run.dt > 0.0)) throw ValidationError("run.dt must be positive");
    if (!(cfg.run.t1 > cfg.run.t0)) throw ValidationError("run.t1 must exceed run.t0");
    const std::size_t steps = static_cast<std::size_t>(std::llround((cfg.run.t1 - cfg.run.t0) / cfg.run.dt));
    if (steps == 0 || std::abs(static_cast<double>(steps) * cfg.run.dt - (cfg.run.t1 - cfg.run.t0)) >
                          1e-9 * (cfg.run.t1 - cfg.run.t0))
        throw ValidationError("run.dt must divide the interval t1 - t0");
    const double n_max = number(run, "n_max", "run", 6.0);
    if (n_max != std::floor(n_max) || n_max < 2 || n_max > 12)
        throw ValidationError("run.n_max must be an integer in [2, 12]");
    cfg.run.n_max = static_cast<int>(n_max);
    const double stride = number(run, "sample_stride", "run", 1.0);
    if (stride != std::floor(stride) || stride < 1)
        throw ValidationError("run.sample_stride must be a positive integer");
    cfg.run.sample_stride = static_cast<std::size_t>(stride);
    if (steps % cfg.run.sample_stride != 0)
        throw ValidationError("run.sample_stride must divide the number of steps");
    cfg.run.seed = static_cast<std::uint64_t>(number(run, "seed", "run", 0.0));
    cfg.potential.omega.check_covers(cfg.run.t0, cfg.run.t1);

    const json& engines = require(doc, "engines", "config");
    if (!engines.is_array() || engines.empty())
        throw ValidationError("engines must list at least one engine");
    for (const json& e : engines) {
        if (!e.is_string()) throw ValidationError("engines entries must be strings");
        const Engine eng = parse_engine(e.get<std::string>());
        if (std::find(cfg.engines.begin(), cfg.engines.end(), eng) == cfg.engines.end())
            cfg.engines.push_back(eng);
    }

    const json pde = doc.value("pde", json::object());
    cfg.pde.grid.x_min = number(pde, "x_min", "pde", -20.0);
    cfg.pde.grid.x_max = number(pde, "x_max", "pde", 20.0);
    const double points = number(pde, "points", "pde", 1024.0);
    if (points != std::floor(points) || points < 8)
        throw ValidationError("pde.points must be a power of two >= 8");
    cfg.pde.grid.points = static_cast<std::size_t>(points);
    cfg.pde.grid.validate();
    const double substeps = number(pde, "substeps", "pde", 1.0);
    if (substeps != std::floor(substeps) || substeps < 1)
        throw ValidationError("pde.substeps must be a positive integer");
    cfg.pde.substeps = static_cast<std::size_t>(substeps);

    const json& init = require(doc, "initial", "config");
    if (init.contains("gaussian")) {
        const json& g = init.at("gaussian");
        GaussianState gs{number(g, "q", "initial.gaussian", 0.0), number(g, "p", "initial.gaussian", 0.0),
                         number(g, "alpha", "initial.gaussian"), number(g, "beta", "initial.gaussian", 0.0),
                         0.0};
        gs.validate();
        cfg.initial = gs;
    } else if (init.contains("moments")) {
        cfg.initial = parse_moments(init.at("moments"), cfg.run.n_max);
    } else if (init.contains("grid_file")) {
        if (!init.at("grid_file").is_string())
            throw ValidationError("initial.grid_file must be a path string");
        fs::path p = init.at("grid_file").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        if (!fs::exists(p)) throw ValidationError("initial.grid_file does not exist: " + p.string());
        cfg.initial = load_wavefunction(p);
    } else {
        throw ValidationError("initial must contain one of gaussian, moments, grid_file");
    }

    for (Engine e : cfg.engines) {
        const std::string name = engine_name(e);
        if ((e == Engine::hierarchy || e == Engine::closed_form) && cfg.potential.V4 != 0.0)
            throw ValidationError("engines." + name + " requires potential.V4 = 0 (harmonic only)");
        if ((e == Engine::gaussian || e == Engine::pde) && cfg.run.n_max > 6)
            throw ValidationError("engines." + name + " supports run.n_max <= 6");
        if (e == Engine::gaussian && !std::holds_alternative<GaussianState>(cfg.initial))
            throw ValidationError("engines.gaussian requires initial.gaussian");
        if (e == Engine::pde && std::holds_alternative<MomentState>(cfg.initial))
            throw ValidationError("engines.pde requires initial.gaussian or initial.grid_file");
    }
    if (const auto* w = std::get_if<GridWavefunction>(&cfg.initial)) cfg.pde.grid = w->spec();

    const json out = doc.value("output", json::object());
    if (global.out_dir) {
        cfg.output.directory = *global.out_dir;
    } else if (out.contains("directory")) {
        cfg.output.directory = out.at("directory").get<std::string>();
    } else if (const char* env = std::getenv("MOMENT_LAB_OUT"); env && *env) {
        cfg.output.directory = env;
    } else {
        cfg.output.directory = "moment-lab-out";
    }
    if (out.contains("formats")) {
        const json& f = out.at("formats");
        if (!f.is_array()) throw ValidationError("output.formats must be an array");
        cfg.output.csv = cfg.output.json = false;
        for (const json& x : f) {
            const std::string s = x.get<std::string>();
            if (s == "csv") cfg.output.csv = true;
            else if (s == "json") cfg.output.json = true;
            else throw ValidationError("output.formats entries must be csv or json");
        }
    }

    cfg.echo = doc;
    cfg.echo["potential"]["allow_inverted"] = allow_inverted;
    if (cfg.echo.contains("output")) cfg.echo.erase("output");
    return cfg;
}

SimulationConfig load_config(const fs::path& path, const GlobalOptions& global) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc, global, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

// --- engines ------------------------------------------------------------------

std::vector<std::string> column_names(int n_max) {
    std::vector<std::string> cols{"t"};
    for (int n = 0; n <= n_max; ++n)
        for (int l = 0; l <= n; ++l) cols.push_back("O_" + std::to_string(n) + "_" + std::to_string(l));
    if (n_max >= 2) {
        cols.insert(cols.end(), {"C", "Delta", "C2"});
        if (n_max >= 4) cols.push_back("C4");
        if (n_max >= 6) cols.push_back("C6");
    }
    return cols;
}

MomentTimeSeries make_series(Engine engine, int n_max, const std::vector<double>& times,
                             const std::vector<MomentState>& states) {
    MomentTimeSeries s{engine, n_max, column_names(n_max), {}};
    for (std::size_t k = 0; k < times.size(); ++k) {
        const MomentState& st = states[k];
        std::vector<double> row{times[k]};
        for (int n = 0; n <= n_max; ++n)
            for (int l = 0; l <= n; ++l) row.push_back(st.at(n, l));
        if (n_max >= 2) {
            row.push_back(ermakov_invariant(st.layer(2)));
            row.push_back(uncertainty_product(st));
            row.push_back(higher_invariant(st.layer(2)));
            if (n_max >= 4) row.push_back(higher_invariant(st.layer(4)));
            if (n_max >= 6) row.push_back(higher_invariant(st.layer(6)));
        }
        s.rows.push_back(std::move(row));
    }
    return s;
}

namespace {

MomentState initial_moments(const SimulationConfig& cfg) {
    const int n_max = cfg.run.n_max;
    if (const auto* g = std::get_if<GaussianState>(&cfg.initial)) {
        if (n_max <= 6) return gaussian_moments(*g, cfg.system, n_max);
        // Gaussian layers beyond 6 come from the grid.
        throw ValidationError("initial.gaussian supports run.n_max <= 6");
    }
    if (const auto* m = std::get_if<MomentState>(&cfg.initial)) return *m;
    const auto& w = std::get<GridWavefunction>(cfg.initial);
    if (n_max > 6) throw ValidationError("initial.grid_file supports run.n_max <= 6");
    MomentExtractor ex(w.spec(), cfg.system);
    return ex.moments(w, n_max);
}

} // namespace

MomentTimeSeries run_engine(const SimulationConfig& cfg, Engine engine) {
    const RunSpec& r = cfg.run;
    switch (engine) {
    case Engine::hierarchy: {
        const MomentSeries s = evolve_layers(initial_moments(cfg), cfg.potential.omega, cfg.system,
                                             r.t0, r.t1, r.dt, r.sample_stride);
        return make_series(engine, r.n_max, s.times, s.states);
    }
    case Engine::closed_form: {
        const MomentState init = initial_moments(cfg);
        const TrajectoryPair pair = solve_classical(cfg.potential.omega, cfg.system, r.t0, r.t1, r.dt);
        std::vector<BasisCoefficients> coeffs;
        for (int n = 1; n <= r.n_max; ++n)
            coeffs.push_back(fit_basis(init.layer(n), pair, cfg.system.mass, r.t0));
        std::vector<double> times;
        std::vector<MomentState> states;
        for (std::size_t i = 0; i < pair.grid().count; i += r.sample_stride) {
            MomentState st = MomentState::zeros(r.n_max);
            for (const auto& c : coeffs)
                st.set_layer(reconstruct_layer(c, pair.sample(i), cfg.system.mass));
            times.push_back(pair.grid().time(i));
            states.push_back(std::move(st));
        }
        return make_series(engine, r.n_max, times, states);
    }
    case Engine::gaussian: {
        const auto& g0 = std::get<GaussianState>(cfg.initial);
        const GaussianSeries s =
            evolve_gaussian(g0, cfg.potential, cfg.system, r.t0, r.t1, r.dt, r.sample_stride);
        std::vector<MomentState> states;
        for (const auto& g : s.states) states.push_back(gaussian_moments(g, cfg.system, r.n_max));
        return make_series(engine, r.n_max, s.times, states);
    }
    case Engine::pde: {
        GridWavefunction w = std::holds_alternative<GridWavefunction>(cfg.initial)
                                 ? std::get<GridWavefunction>(cfg.initial)
                                 : init_gaussian(std::get<GaussianState>(cfg.initial), cfg.pde.grid,
                                                 cfg.system);
        const double dt = r.dt / static_cast<double>(cfg.pde.substeps);
        const OracleResult res = run_oracle(w, cfg.potential, cfg.system, r.t0, r.t1, dt,
                                            r.sample_stride * cfg.pde.substeps, r.n_max);
        if (!(res.max_norm_drift < 1e-10)) {
            std::ostringstream msg;
            msg << "pde_oracle: norm drift " << res.max_norm_drift << " exceeds 1e-10";
            throw UntrustedResultError(msg.str());
        }
        return make_series(engine, r.n_max, res.series.times, res.series.states);
    }
    }
    throw ValidationError("unknown engine");
}

// --- output -------------------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string to_csv(const MomentTimeSeries& s, const SimulationConfig& cfg) {
    std::ostringstream os;
    os << "# moment-lab " << kVersion << '\n';
    os << "# engine: " << engine_name(s.engine) << '\n';
    os << "# units: m=" << format_double(cfg.system.mass) << " hbar=" << format_double(cfg.system.hbar)
       << "; t [time]; O_n_l [length^(n-l) momentum^l]; C, Delta, C2 [action^2]; C4 [action^4]; "
          "C6 [action^6]\n";
    os << "# columns: t, O_n_l for 0<=l<=n<=" << s.n_max
       << " in lexicographic (n,l) order, then invariants\n";
    os << "# config: " << cfg.echo.dump() << '\n';
    for (std::size_t i = 0; i < s.columns.size(); ++i) os << (i ? "," : "") << s.columns[i];
    os << '\n';
    for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << '\n';
    }
    return os.str();
}

json sidecar_json(const MomentTimeSeries& s, const SimulationConfig& cfg) {
    json j;
    j["engine"] = engine_name(s.engine);
    j["version"] = kVersion;
    j["config"] = cfg.echo;
    j["columns"] = s.columns;
    j["rows"] = s.rows.size();
    return j;
}

json compare(const std::vector<MomentTimeSeries>& series) {
    json report;
    report["pairs"] = json::array();
    double overall = 0.0;
    for (std::size_t a = 0; a < series.size(); ++a) {
        for (std::size_t b = a + 1; b < series.size(); ++b) {
            const auto& A = series[a];
            const auto& B = series[b];
            json pair;
            pair["engines"] = {engine_name(A.engine), engine_name(B.engine)};
            json cols = json::object();
            double pair_max = 0.0;
            const std::size_t rows = std::min(A.rows.size(), B.rows.size());
            for (std::size_t ca = 1; ca < A.columns.size(); ++ca) {
                const auto it = std::find(B.columns.begin(), B.columns.end(), A.columns[ca]);
                if (it == B.columns.end()) continue;
                const auto cb = static_cast<std::size_t>(it - B.columns.begin());
                double dev = 0.0;
                for (std::size_t r = 0; r < rows; ++r)
                    dev = std::max(dev, std::abs(A.rows[r][ca] - B.rows[r][cb]));
                cols[A.columns[ca]] = dev;
                pair_max = std::max(pair_max, dev);
            }
            pair["max_abs_deviation"] = cols;
            pair["max"] = pair_max;
            overall = std::max(overall, pair_max);
            report["pairs"].push_back(std::move(pair));
        }
    }
    report["max"] = overall;
    return report;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        log << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalGuardError& e) {
        log << "numerical guard tripped: " << e.what() << '\n';
        return kNumericalGuard;
    }
}

int run_config(const SimulationConfig& cfg, int threads, std::ostream& log) {
    std::vector<MomentTimeSeries> results(cfg.engines.size());
    std::vector<std::exception_ptr> errors(cfg.engines.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.engines.size(); i = next++) {
            try {
                results[i] = run_engine(cfg, cfg.engines[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int pool = std::max(1, std::min<int>(threads, static_cast<int>(cfg.engines.size())));
    std::vector<std::thread> workers;
    for (int i = 1; i < pool; ++i) workers.emplace_back(worker);
    worker();
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    fs::create_directories(cfg.output.directory);
    for (const auto& s : results) {
        const std::string stem = engine_name(s.engine);
        if (cfg.output.csv) write_file(cfg.output.directory / (stem + ".csv"), to_csv(s, cfg));
        if (cfg.output.json)
            write_file(cfg.output.directory / (stem + ".json"), sidecar_json(s, cfg).dump(2) + "\n");
        log << "wrote " << stem << " (" << s.rows.size() << " rows)\n";
    }
    if (results.size() >= 2) {
        const json report = compare(results);
        write_file(cfg.output.directory / "comparison.json", report.dump(2) + "\n");
        log << "comparison max deviation " << format_double(report["max"].get<double>()) << '\n';
    }
    return kOk;
}

} // namespace

int run(const fs::path& config_path, const GlobalOptions& global, std::ostream& log) {
    return guarded(log, [&] {
        const SimulationConfig cfg = load_config(config_path, global);
        return run_config(cfg, global.threads, log);
    });
}

void set_dotted(json& doc, const std::string& key, const std::string& value) {
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) throw ValidationError("--param has an empty key segment");
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

int sweep(const fs::path& config_path, const std::string& key, const std::vector<std::string>& values,
          const GlobalOptions& global, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (values.empty()) throw ValidationError("--values must list at least one value");
        std::ifstream in(config_path);
        if (!in) throw ValidationError("cannot open config " + config_path.string());
        json base;
        try {
            base = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError("config is not valid JSON: " + std::string(e.what()));
        }
        const fs::path base_dir =
            config_path.parent_path().empty() ? fs::path(".") : config_path.parent_path();
        const SimulationConfig probe = parse_config(base, global, base_dir);

        std::vector<SimulationConfig> configs;
        for (const std::string& v : values) {
            json doc = base;
            set_dotted(doc, key, v);
            GlobalOptions g = global;
            g.out_dir = (probe.output.directory / (key + "=" + v)).string();
            configs.push_back(parse_config(doc, g, base_dir));
        }

        std::vector<int> codes(configs.size(), kOk);
        std::vector<std::string> logs(configs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < configs.size(); i = next++) {
                std::ostringstream os;
                codes[i] = guarded(os, [&] { return run_config(configs[i], 1, os); });
                logs[i] = os.str();
            }
        };
        const int pool = std::max(1, std::min<int>(global.threads, static_cast<int>(configs.size())));
        std::vector<std::thread> workers;
        for (int i = 1; i < pool; ++i) workers.emplace_back(worker);
        worker();
        for (auto& t : workers) t.join();

        int worst = kOk;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            log << "[" << key << "=" << values[i] << "] " << logs[i];
            worst = std::max(worst, codes[i]);
        }
        return worst;
    });
}

// --- verification suites --------------------------------------------------------

bool SuiteReport::passed() const {
    return std::all_of(cases.begin(), cases.end(), [](const SuiteCase& c) { return c.passed; });
}

std::vector<std::pair<std::string, FrequencyProfile>> standard_profiles() {
    return {
        {"constant", FrequencyProfile::constant(1.0)},
        {"sinusoidal", FrequencyProfile::sinusoidal(1.0, 0.3, 2.0)},
        {"piecewise", FrequencyProfile::piecewise({{0.0, 1.0}, {5.0, 2.0}})},
    };
}

GaussianState reference_packet() { return {1.0, 0.5, 0.5, 0.2, 0.0}; }

namespace {

constexpr double kT0 = 0.0;
constexpr double kT1 = 10.0;
constexpr double kDt = 1e-3;

SuiteCase bound_case(std::string label, double value, double tol, std::string detail = {}) {
    return {std::move(label), value, tol, value < tol, std::move(detail)};
}

void suite_algebra(SuiteReport& rep) {
    using namespace weyl;
    const SL2Triple g = SL2Triple::standard();
    const GaussRational i = GaussRational::i();
    auto exact = [&](std::string label, const WeylElement& residual) {
        rep.cases.push_back({std::move(label), residual.is_zero() ? 0.0 : 1.0, 0.0,
                             residual.is_zero(), residual.to_string()});
    };
    exact("[D,x^2] = -2i hbar x^2",
          commutator(g.D, g.x2) - WeylElement::scalar(i * GaussRational(-2), 1) * g.x2);
    exact("[D,p^2] = +2i hbar p^2",
          commutator(g.D, g.p2) - WeylElement::scalar(i * GaussRational(2), 1) * g.p2);
    exact("[x^2,p^2] = +4i hbar D",
          commutator(g.x2, g.p2) - WeylElement::scalar(i * GaussRational(4), 1) * g.D);
    exact("Casimir = -3 hbar^2/4",
          casimir(g) - WeylElement::scalar(GaussRational(mpq_class(-3, 4)), 2));
    for (int n = 0; n <= 8; ++n) {
        for (int l = 0; l <= n; ++l) {
            const LadderReport r = verify_ladder(n, l);
            for (const auto& c : r.checks)
                exact("ladder n=" + std::to_string(n) + " l=" + std::to_string(l) + " " + c.name,
                      c.residual);
        }
    }
}

void suite_closed_form(SuiteReport& rep) {
    const SystemParams params;
    const MomentState init = gaussian_moments(reference_packet(), params, 6);
    for (const auto& [name, profile] : standard_profiles()) {
        for (int n = 0; n <= 6; ++n) {
            const ClosedFormResidual res = verify_closed_form(n, profile, params, kT0, kT1);
            std::ostringstream d;
            d << "worst at l=" << res.worst_l << " r=" << res.worst_r << " t=" << res.worst_t;
            rep.cases.push_back(bound_case("closed-form residual " + name + " n=" + std::to_string(n),
                                           res.max_residual, 1e-6, d.str()));
        }
        const TrajectoryPair pair = solve_classical(profile, params, kT0, kT1, kDt);
        for (int n = 1; n <= 6; ++n) {
            const auto direct = evolve_layer(init.layer(n), profile, params, kT0, kT1, kDt);
            const BasisCoefficients c = fit_basis(init.layer(n), pair, params.mass, kT0);
            double scale = 0.0, err = 0.0;
            for (std::size_t i = 0; i < direct.size(); ++i) {
                const MomentLayer rec = reconstruct_layer(c, pair.sample(i), params.mass);
                for (int l = 0; l <= n; ++l) {
                    scale = std::max(scale, std::abs(direct[i][l]));
                    err = std::max(err, std::abs(direct[i][l] - rec[l]));
                }
            }
            rep.cases.push_back(bound_case("reconstruction vs RK4 " + name + " n=" + std::to_string(n),
                                           err / scale, 1e-7, "relative to max |moment|"));
        }
    }
}

double term_scale(const MomentLayer& layer) {
    double s = 0.0, binom = 1.0;
    for (int l = 0; l <= layer.n; ++l) {
        s += binom * std::abs(layer[l] * layer[layer.n - l]);
        binom = binom * (layer.n - l) / (l + 1);
    }
    return 0.5 * s;
}

void suite_invariants(SuiteReport& rep) {
    const SystemParams params;
    const MomentState init = gaussian_moments(reference_packet(), params, 6);
    for (const auto& [name, profile] : standard_profiles()) {
        const MomentSeries s = evolve_layers(init, profile, params, kT0, kT1, kDt, 10);
        const double c0 = ermakov_invariant(init.layer(2));
        double drift = 0.0;
        for (const auto& st : s.states)
            drift = std::max(drift, std::abs(ermakov_invariant(st.layer(2)) - c0));
        rep.cases.push_back(bound_case("Ermakov-Lewis drift " + name, drift / std::abs(c0), 1e-7));
        for (int n = 2; n <= 6; n += 2) {
            const double h0 = higher_invariant(init.layer(n));
            double d = 0.0;
            for (const auto& st : s.states)
                d = std::max(d, std::abs(higher_invariant(st.layer(n)) - h0));
            rep.cases.push_back(bound_case("C(" + std::to_string(n) + ") drift " + name,
                                           d / std::abs(h0), 1e-7));
        }
        for (int n = 1; n <= 5; n += 2) {
            double worst = 0.0;
            for (const auto& st : s.states)
                worst = std::max(worst, std::abs(higher_invariant(st.layer(n))) /
                                            std::max(term_scale(st.layer(n)), 1e-300));
            rep.cases.push_back(bound_case("C(" + std::to_string(n) + ") vanishes " + name, worst,
                                           1e-13));
        }
    }
}

void suite_oracle(SuiteReport& rep, const VerifyOptions& opt) {
    const SystemParams params;
    const GaussianState g0 = reference_packet();
    GridSpec grid;
    grid.points = opt.grid_points;
    constexpr std::size_t kSubsteps = 8;
    constexpr std::size_t kStride = 100;
    for (const auto& [name, profile] : standard_profiles()) {
        try {
            const MomentState init = gaussian_moments(g0, params, 4);
            const MomentSeries h = evolve_layers(init, profile, params, kT0, kT1, kDt, kStride);
            PotentialSpec pot;
            pot.omega = profile;
            const GridWavefunction w0 = init_gaussian(g0, grid, params);
            const OracleResult o = run_oracle(w0, pot, params, kT0, kT1, kDt / kSubsteps,
                                              kStride * kSubsteps, 4);
            double dev = 0.0, min_delta = 1e300;
            for (std::size_t k = 0; k < h.states.size(); ++k) {
                for (int n = 1; n <= 4; ++n)
                    for (int l = 0; l <= n; ++l)
                        dev = std::max(dev, std::abs(h.states[k].at(n, l) - o.series.states[k].at(n, l)));
                min_delta = std::min(min_delta, uncertainty_product(o.series.states[k]));
            }
            const double bound = params.hbar * params.hbar / 4.0;
            rep.cases.push_back(bound_case("oracle vs hierarchy " + name, dev, 1e-5, "n <= 4, absolute"));
            rep.cases.push_back({"Robertson-Schroedinger " + name, bound - min_delta, 1e-9,
                                 min_delta >= bound - 1e-9, "min Delta"});
            rep.cases.push_back(bound_case("norm drift " + name, o.max_norm_drift, 1e-10));
        } catch (const NumericalGuardError& e) {
            rep.cases.push_back({"oracle " + name, std::numeric_limits<double>::infinity(), 0.0, false,
                                 e.what()});
        }
    }
}

} // namespace

SuiteReport verify_suite(const std::string& name, const VerifyOptions& options) {
    SuiteReport rep{name, {}};
    if (name == "algebra") suite_algebra(rep);
    else if (name == "closed-form") suite_closed_form(rep);
    else if (name == "invariants") suite_invariants(rep);
    else if (name == "oracle") suite_oracle(rep, options);
    else throw ValidationError("unknown suite '" + name + "' (algebra, closed-form, invariants, oracle)");
    return rep;
}

void print_report(const SuiteReport& report, std::ostream& os) {
    for (const auto& c : report.cases) {
        os << (c.passed ? "PASS " : "FAIL ") << c.label << "  value=" << format_double(c.value)
           << " tol=" << c.tolerance;
        if (!c.passed && !c.detail.empty()) os << "  [" << c.detail << "]";
        os << '\n';
    }
    os << report.suite << ": " << (report.passed() ? "all cases passed" : "FAILED") << '\n';
}

} // namespace momentlab::harness
