#pragma once

#include "momentlab/classical.hpp"
#include "momentlab/gaussian.hpp"
#include "momentlab/moments.hpp"
#include "momentlab/pde.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace momentlab::harness {

inline constexpr const char* kVersion = "1.0.0";

/// Process exit codes of the `run` and `sweep` commands.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kValidation = 2, kNumericalGuard = 3 };

enum class Engine { hierarchy, closed_form, gaussian, pde };

std::string engine_name(Engine e);
Engine parse_engine(const std::string& name);

/// Flags that apply across subcommands.
struct GlobalOptions {
    std::optional<std::string> out_dir;
    int threads = 1;
    bool allow_inverted = false;
};

struct RunSpec {
    double t0 = 0.0;
    double t1 = 10.0;
    double dt = 1e-3;
    int n_max = 6;
    std::size_t sample_stride = 100;
    std::uint64_t seed = 0;
};

struct PdeSpec {
    GridSpec grid;
    std::size_t substeps = 1; // PDE steps per run.dt
};

struct OutputSpec {
    std::filesystem::path directory;
    bool csv = true;
    bool json = true;
};

/// Gaussian parameters, explicit moment layers, or a wavefunction file.
using InitialState = std::variant<GaussianState, MomentState, GridWavefunction>;

struct SimulationConfig {
    SystemParams system;
    PotentialSpec potential;
    InitialState initial = GaussianState{};
    RunSpec run;
    std::vector<Engine> engines;
    PdeSpec pde;
    OutputSpec output;
    nlohmann::json echo; // normalised config, written to every output file
};

/// Parses and validates a config document. Relative file references resolve
/// against `base_dir`. Throws ValidationError with the offending key.
SimulationConfig parse_config(const nlohmann::json& doc, const GlobalOptions& global,
                              const std::filesystem::path& base_dir = ".");

SimulationConfig load_config(const std::filesystem::path& path, const GlobalOptions& global);

/// Reads {"x_min", "x_max", "re": [...], "im": [...]}.
GridWavefunction load_wavefunction(const std::filesystem::path& path);
void save_wavefunction(const GridWavefunction& w, const std::filesystem::path& path);

/// Column names of a moment time series for the given n_max: t, O_n_l in
/// lexicographic (n, l) order, then C, Delta, C2, C4, C6 where defined.
std::vector<std::string> column_names(int n_max);

struct MomentTimeSeries {
    Engine engine = Engine::hierarchy;
    int n_max = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Flattens states into rows following column_names(n_max).
MomentTimeSeries make_series(Engine engine, int n_max, const std::vector<double>& times,
                             const std::vector<MomentState>& states);

MomentTimeSeries run_engine(const SimulationConfig& config, Engine engine);

std::string to_csv(const MomentTimeSeries& series, const SimulationConfig& config);
nlohmann::json sidecar_json(const MomentTimeSeries& series, const SimulationConfig& config);

/// Max absolute deviation per shared column for every engine pair.
nlohmann::json compare(const std::vector<MomentTimeSeries>& series);

/// Executes every selected engine and writes outputs; returns an ExitCode.
int run(const std::filesystem::path& config_path, const GlobalOptions& global, std::ostream& log);

/// Runs one config per value of the dotted key, each into its own
/// subdirectory of the output directory.
int sweep(const std::filesystem::path& config_path, const std::string& key,
          const std::vector<std::string>& values, const GlobalOptions& global, std::ostream& log);

/// Sets a dotted key ("potential.V4") in a JSON document, parsing `value`
/// as JSON when possible and as a string otherwise.
void set_dotted(nlohmann::json& doc, const std::string& key, const std::string& value);

// --- verification suites ------------------------------------------------------

struct SuiteCase {
    std::string label;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<SuiteCase> cases;

    bool passed() const;
};

struct VerifyOptions {
    std::size_t grid_points = 1024;
    int threads = 1;
};

/// The built-in profile matrix: constant ω=1; sinusoidal ω₀=1, ε=0.3, Ω=2;
/// piecewise ω 1→2 at t=5.
std::vector<std::pair<std::string, FrequencyProfile>> standard_profiles();

/// The squeezed, displaced Gaussian used as initial data by the suites.
GaussianState reference_packet();

/// One of "algebra", "closed-form", "invariants", "oracle".
SuiteReport verify_suite(const std::string& name, const VerifyOptions& options = {});

void print_report(const SuiteReport& report, std::ostream& os);

} // namespace momentlab::harness
