#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "conecert/cli.hpp"

using namespace conecert;
using namespace conecert::cli;

namespace {

RunConfig small_doubling() {
    RunConfig cfg;
    cfg.map = "doubling";
    cfg.obs = "cos1";
    cfg.grid_n = 512;
    cfg.samples = 20000;
    cfg.n_list = {64, 256};
    cfg.z_points = 16;
    cfg.ring_points = 8;
    cfg.ring_n = 32;
    cfg.refined_n = 64;
    cfg.refined_t_points = 24;
    cfg.eps_z_count = 8;
    cfg.eps_u_samples = 3;
    cfg.eps_pairs_per_u = 40;
    cfg.diameter_pairs = 32;
    cfg.lab_count = 50;
    cfg.lab_comparison_count = 10;
    return cfg;
}

const std::string& artifact(const CommandResult& r, const std::string& name) {
    for (const auto& [n, content] : r.artifacts)
        if (n == name) return content;
    static const std::string empty;
    return empty;
}

}  // namespace

TEST_CASE("config validation and hashing") {
    RunConfig cfg = small_doubling();
    CHECK_NOTHROW(cfg.validate());
    const std::string h1 = config_hash(cfg);
    cfg.seed = 2;
    CHECK(config_hash(cfg) != h1);
    cfg.seed = 1;
    CHECK(config_hash(cfg) == h1);

    RunConfig bad = small_doubling();
    bad.map = "tent";
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = small_doubling();
    bad.abs_tol = 1.0;  // outside [1e-14, 1e-2]
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = small_doubling();
    bad.n_list.clear();
    CHECK_THROWS_AS(bad.validate(), config_error);

    // round trip through the JSON schema
    const RunConfig parsed = config_from_json_text(config_json(cfg).dump());
    CHECK(config_hash(parsed) == config_hash(cfg));
    CHECK_THROWS_AS(config_from_json_text("{\"mystery\": 3}"), config_error);
    CHECK_THROWS_AS(config_from_json_text("not json"), config_error);
}

TEST_CASE("certify command emits the constant chain") {
    RunConfig cfg = small_doubling();
    const auto res = run_certify(cfg);
    REQUIRE(res.exit_code == 0);
    const auto doc = nlohmann::json::parse(artifact(res, "certificate.json"));
    CHECK(doc["tool_version"] == "0.1.0");
    CHECK(doc["config_hash"] == config_hash(cfg));
    const double dr = std::stod(doc["certificate"]["fields"]["D_R"]["value"].dump());
    CHECK(dr == doctest::Approx(1.0 + 2.0 * std::log(3.0)).epsilon(1e-12));
    CHECK(doc["certificate"]["fields"]["G"]["note"].get<std::string>().find("G=0") !=
          std::string::npos);
    CHECK(doc["certificate"]["per_n"].size() == 2);

    // gauss preset carries its example constants
    RunConfig gauss = small_doubling();
    gauss.map = "gauss";
    gauss.alpha = 0.2;
    gauss.j_max = 24;
    gauss.grid_n = 256;
    const auto res2 = run_certify(gauss);
    REQUIRE(res2.exit_code == 0);
    const auto doc2 = nlohmann::json::parse(artifact(res2, "certificate.json"));
    CHECK(std::stod(doc2["certificate"]["fields"]["gamma"]["value"].dump()) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(std::stod(doc2["certificate"]["fields"]["G"]["value"].dump()) ==
          doctest::Approx(10.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("exit codes follow the contract") {
    RunConfig cfg = small_doubling();
    cfg.obs = "unknown-observable";
    CHECK(run_certify(cfg).exit_code == 1);

    // cocycle observable: degenerate variance is a domain error
    RunConfig coc = small_doubling();
    coc.obs = "cocycle";
    CHECK(run_experiment(coc).exit_code == 2);
    CHECK(run_certify(coc).exit_code == 2);

    // under-declared norms break the ratio sweep: verification failure
    RunConfig lying = small_doubling();
    lying.obs_sup_norm = 0.05;
    lying.obs_lip_seminorm = 0.05;
    lying.only = "5.1";
    CHECK(run_check_lemmas(lying).exit_code == 4);
}

TEST_CASE("spectrum command emits conjugate-symmetric pressure rows") {
    RunConfig cfg = small_doubling();
    cfg.ring_n = 16;
    const auto res = run_spectrum(cfg);
    REQUIRE(res.exit_code == 0);
    const auto doc = nlohmann::json::parse(artifact(res, "spectrum.json"));
    CHECK(std::stod(doc["lambda0"].dump()) == doctest::Approx(1.0).epsilon(1e-10));
    const double s_sp = std::stod(doc["sigma2_spectral"].dump());
    const double s_gk = std::stod(doc["sigma2_green_kubo"]["value"].dump());
    CHECK(std::abs(s_sp - s_gk) < 1e-3);

    const std::string& csv = artifact(res, "spectrum.csv");
    CHECK(csv.find("re_z,im_z,re_P,im_P,abs_phi_n") == 0);
    // parse rows, check P(conj z) = conj P(z) across the ladder
    std::vector<std::array<double, 5>> rows;
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        std::array<double, 5> row{};
        std::istringstream cells(line);
        std::string cell;
        for (int c = 0; c < 5 && std::getline(cells, cell, ','); ++c) row[c] = std::stod(cell);
        rows.push_back(row);
    }
    CHECK(rows.size() == 17);
    for (const auto& r : rows) {
        for (const auto& rc : rows) {
            if (rc[0] == r[0] && rc[1] == -r[1]) {
                CHECK(rc[2] == doctest::Approx(r[2]).epsilon(1e-9));
                CHECK(rc[3] == doctest::Approx(-r[3]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("check-lemmas command with the only filter") {
    RunConfig cfg = small_doubling();
    cfg.only = "6.4";
    const auto res = run_check_lemmas(cfg);
    CHECK(res.exit_code == 0);
    const auto doc = nlohmann::json::parse(artifact(res, "checks.json"));
    REQUIRE(doc["checks"].size() == 1);
    CHECK(doc["checks"][0]["id"] == "6.4");
    CHECK(doc["total_violations"] == 0);
}

TEST_CASE("cone lab determinism") {
    RunConfig cfg = small_doubling();
    const auto a = run_cone_lab(cfg);
    const auto b = run_cone_lab(cfg);
    CHECK(a.exit_code == 0);
    CHECK(artifact(a, "checks.json") == artifact(b, "checks.json"));
    // a different dimension still passes and changes the report
    RunConfig big = cfg;
    big.lab_dim = 9;
    const auto c = run_cone_lab(big);
    CHECK(c.exit_code == 0);
    CHECK(artifact(c, "checks.json") != artifact(a, "checks.json"));
}

TEST_CASE("byte-identical reruns across commands") {
    RunConfig cfg = small_doubling();
    const auto c1 = run_certify(cfg), c2 = run_certify(cfg);
    CHECK(artifact(c1, "certificate.json") == artifact(c2, "certificate.json"));
    const auto e1 = run_experiment(cfg), e2 = run_experiment(cfg);
    CHECK(e1.exit_code == 0);
    CHECK(artifact(e1, "experiment.json") == artifact(e2, "experiment.json"));
    CHECK(artifact(e1, "curves.csv") == artifact(e2, "curves.csv"));
    const std::string& csv = artifact(e1, "curves.csv");
    CHECK(csv.find("n,distance,slack,feller,certificate") == 0);
    CHECK(csv.find('\r') == std::string::npos);  // LF line endings
}

TEST_CASE("custom piecewise-linear map and table observable") {
    // the doubling map expressed as branch tables: exactly the preset matrix
    RunConfig cfg = small_doubling();
    cfg.map = "custom";
    cfg.custom_map.present = true;
    cfg.custom_map.gamma = 2.0;
    cfg.custom_map.G = 0.0;
    cfg.custom_map.branches = {
        {0.0, 0.5, {0.0, 1.0}, {0.0, 0.5}, {-std::log(2.0), -std::log(2.0)}},
        {0.5, 1.0, {0.0, 1.0}, {0.5, 1.0}, {-std::log(2.0), -std::log(2.0)}},
    };
    const auto res = run_certify(cfg);
    REQUIRE(res.exit_code == 0);
    const auto doc = nlohmann::json::parse(artifact(res, "certificate.json"));
    CHECK(std::stod(doc["certificate"]["fields"]["D_R"]["value"].dump()) ==
          doctest::Approx(1.0 + 2.0 * std::log(3.0)).epsilon(1e-12));
    CHECK(std::stod(doc["certificate"]["fields"]["sigma2"]["value"].dump()) ==
          doctest::Approx(0.5).epsilon(2e-3));

    // a tent-shaped table observable with derived norms
    RunConfig tab = small_doubling();
    tab.obs = "table";
    tab.obs_table.present = true;
    tab.obs_table.x = {0.0, 0.5, 1.0};
    tab.obs_table.y = {-1.0, 1.0, -1.0};
    const auto res2 = run_certify(tab);
    REQUIRE(res2.exit_code == 0);
    const auto doc2 = nlohmann::json::parse(artifact(res2, "certificate.json"));
    // centered copy keeps sup <= 1 + |mean|, lip derived from cell slopes = 4
    CHECK(std::stod(doc2["certificate"]["fields"]["lip_seminorm"]["value"].dump()) ==
          doctest::Approx(4.0).epsilon(1e-12));
    CHECK(doc2["observable_validation"]["lip_ok"] == true);

    // schema round trip covers the new sections
    const RunConfig back = config_from_json_text(config_json(cfg).dump());
    CHECK(config_hash(back) == config_hash(cfg));
    RunConfig bad = cfg;
    bad.custom_map.branches.clear();
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("nonmarkov section rides along the certificate") {
    RunConfig cfg = small_doubling();
    cfg.has_nonmarkov = true;
    cfg.nonmarkov.gamma = 3.0;
    cfg.nonmarkov.A_LY = 2.0;
    cfg.nonmarkov.variation_f = 1.0;
    cfg.nonmarkov.sup_f = 1.0;
    cfg.nonmarkov.card_A0 = 3.0;
    cfg.nonmarkov.N_star = 4;
    cfg.nonmarkov.D_R = 5.0;
    cfg.nonmarkov.sigma = 0.5;
    cfg.nonmarkov.n = 16.0;
    const auto res = run_certify(cfg);
    REQUIRE(res.exit_code == 0);
    const auto doc = nlohmann::json::parse(artifact(res, "certificate.json"));
    CHECK(std::stod(doc["nonmarkov"]["Delta0"].dump()) == doctest::Approx(3.51));
    CHECK(doc["nonmarkov"]["exp_bound_ok"] == true);
}
