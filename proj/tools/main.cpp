#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conecert/cli.hpp"
#include "conecert/errors.hpp"

namespace {

using conecert::cli::RunConfig;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

void apply_kv_list(const std::string& text, RunConfig& cfg, bool nonmarkov) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw conecert::config_error("expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const double value = std::stod(item.substr(eq + 1));
        if (nonmarkov) {
            cfg.has_nonmarkov = true;
            auto& nm = cfg.nonmarkov;
            if (key == "gamma") nm.gamma = value;
            else if (key == "A") nm.A_LY = value;
            else if (key == "Nstar") nm.N_star = static_cast<int>(value);
            else if (key == "DR") nm.D_R = value;
            else if (key == "varf") nm.variation_f = value;
            else if (key == "cardA0") nm.card_A0 = value;
            else if (key == "supf") nm.sup_f = value;
            else if (key == "sigma") nm.sigma = value;
            else if (key == "n") nm.n = value;
            else throw conecert::config_error("unknown nonmarkov key '" + key + "'");
        } else {
            if (key == "abs") cfg.abs_tol = value;
            else if (key == "rel") cfg.rel_tol = value;
            else throw conecert::config_error("unknown tolerance key '" + key + "'");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cone-certify: certified spectral constants and Berry-Esseen "
                 "verification for expanding interval maps"};
    app.require_subcommand(1);

    // Pre-scan for --config so flags can override file values.
    RunConfig cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = conecert::cli::config_from_json_file(argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << e.what() << "\n";
                return 1;
            }
        }
    }

    std::string config_path, n_list_text, tol_text, nonmarkov_text;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--map", cfg.map, "map preset: doubling | gauss");
        cmd->add_option("--obs", cfg.obs, "observable preset: cos1 | sin1 | cocycle");
        cmd->add_option("--alpha", cfg.alpha, "gauss metric parameter in (0, 1/2)");
        cmd->add_option("--jmax", cfg.j_max, "gauss branch truncation");
        cmd->add_option("--grid", cfg.grid_n, "collocation nodes (0 = preset default)");
        cmd->add_option("--samples", cfg.samples, "Monte Carlo sample count");
        cmd->add_option("--seed", cfg.seed, "random stream seed");
        cmd->add_option("--n-list", n_list_text, "comma-separated block sizes");
        cmd->add_option("--out", cfg.out_dir, "output directory (default: stdout)");
        cmd->add_option("--only", cfg.only, "restrict check-lemmas to one id, e.g. 6.4");
        cmd->add_option("--tol", tol_text, "tolerance overrides abs=..,rel=..");
        cmd->add_option("--nonmarkov", nonmarkov_text,
                        "gamma=..,A=..,Nstar=..,DR=..,varf=..,cardA0=..,supf=..,sigma=..,n=..");
    };

    auto* certify = app.add_subcommand("certify", "compute the explicit constant chain");
    add_common(certify);
    auto* spectrum = app.add_subcommand("spectrum", "leading triple, pressure and variance");
    add_common(spectrum);
    auto* lemmas = app.add_subcommand("check-lemmas", "numerical sweeps of the inequalities");
    add_common(lemmas);
    auto* lab = app.add_subcommand("cone-lab", "randomized cone-geometry property sweeps");
    add_common(lab);
    lab->add_option("--dim", cfg.lab_dim, "cone dimension");
    lab->add_option("--count", cfg.lab_count, "number of sampled instances");
    auto* experiment = app.add_subcommand("experiment", "end-to-end Berry-Esseen experiment");
    add_common(experiment);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!n_list_text.empty()) cfg.n_list = parse_int_list(n_list_text);
        if (!tol_text.empty()) apply_kv_list(tol_text, cfg, false);
        if (!nonmarkov_text.empty()) apply_kv_list(nonmarkov_text, cfg, true);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    conecert::cli::CommandResult result;
    if (certify->parsed()) result = conecert::cli::run_certify(cfg);
    else if (spectrum->parsed()) result = conecert::cli::run_spectrum(cfg);
    else if (lemmas->parsed()) result = conecert::cli::run_check_lemmas(cfg);
    else if (lab->parsed()) result = conecert::cli::run_cone_lab(cfg);
    else result = conecert::cli::run_experiment(cfg);

    return conecert::cli::emit(result, cfg);
}
