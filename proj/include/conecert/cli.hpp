#ifndef CONECERT_CLI_HPP
#define CONECERT_CLI_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "conecert/certify.hpp"
#include "conecert/report.hpp"

namespace conecert::cli {

// Custom map: piecewise-linear inverse-branch tables with explicit
// expansion and Lipschitz declarations.
struct CustomBranch {
    double lo = 0.0, hi = 1.0;          // forward-map domain of the branch
    std::vector<double> x;              // shared breakpoints spanning [0,1]
    std::vector<double> sigma;          // inverse-branch values
    std::vector<double> log_weight;     // g(sigma(x)) values
};
struct CustomMapSpec {
    bool present = false;
    double gamma = 0.0;
    double G = 0.0;
    std::vector<CustomBranch> branches;
};

struct ObsTable {
    bool present = false;
    std::vector<double> x;
    std::vector<double> y;
};

// One configuration drives every subcommand; unused fields are ignored but
// still hashed, so identical configs give byte-identical reports.
struct RunConfig {
    // model
    std::string map = "doubling";  // doubling | gauss | custom
    double alpha = 0.2;            // gauss metric parameter
    int j_max = 64;                // gauss branch truncation
    CustomMapSpec custom_map;
    std::string obs = "cos1";      // cos1 | sin1 | cocycle | table
    ObsTable obs_table;
    double obs_sup_norm = 0.0;     // > 0 overrides the declared sup norm
    double obs_lip_seminorm = 0.0; // > 0 overrides the declared Lipschitz seminorm
    int grid_n = 0;                // 0 = preset default (4096 doubling, 2048 gauss)

    // Monte Carlo / sweeps
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    std::vector<int> n_list = {256, 1024, 4096};
    int validation_grid = 128;
    int z_points = 96;        // pressure sweeps (6.4/6.5)
    int ring_points = 32;     // 6.3
    int ring_n = 256;
    int refined_n = 1024;     // 7.1
    int refined_t_points = 64;
    int eps_z_count = 100;    // 5.1: z values
    int eps_u_samples = 8;    // 5.1: cone vectors per z
    int eps_pairs_per_u = 125;
    int diameter_pairs = 1000;  // 5.2

    // cone lab
    int lab_dim = 5;
    int lab_count = 1000;
    int lab_comparison_count = 100;

    // tolerances
    double abs_tol = 1e-6;
    double rel_tol = 1e-4;

    std::string only;     // lemma filter for check-lemmas ("6.4", ...)
    std::string out_dir;  // empty = stdout

    bool has_nonmarkov = false;
    certify::NonMarkovInputs nonmarkov;

    void validate() const;  // throws config_error
};

// Canonical JSON form (fixed key order) and its FNV fingerprint; reports
// embed both.
report::Json config_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

// Load/override a config from a JSON document (the same schema config_json
// emits).
RunConfig config_from_json_text(const std::string& text, RunConfig base = {});
RunConfig config_from_json_file(const std::string& path, RunConfig base = {});

struct CommandResult {
    int exit_code = 0;
    // artifact name -> exact file bytes
    std::vector<std::pair<std::string, std::string>> artifacts;
    std::string message;  // one-line summary for stderr
};

CommandResult run_certify(const RunConfig& cfg);
CommandResult run_spectrum(const RunConfig& cfg);
CommandResult run_check_lemmas(const RunConfig& cfg);
CommandResult run_cone_lab(const RunConfig& cfg);
CommandResult run_experiment(const RunConfig& cfg);

// Write artifacts to cfg.out_dir (or stdout when unset); returns exit code.
int emit(const CommandResult& result, const RunConfig& cfg);

}  // namespace conecert::cli

#endif
