#include <doctest.h>

#include "mlnl/config.hpp"
#include "mlnl/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mlnl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string out_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / "mlnl_cli_tests" / name;
    std::filesystem::remove_all(p);
    return p.string();
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("minimal config parses with defaults") {
    std::string text = R"({
        "name": "minimal",
        "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
        "kernel": {"family": "fractional", "alpha": 1.5},
        "a": 0.5
    })";
    auto c = parse_config(text);
    CHECK(c.kappa == doctest::Approx(0.05));
    CHECK(c.h == doctest::Approx(1.0 / 64.0));
    CHECK(c.problem == "linear");
    CHECK(c.workers == 1);
    auto dom = c.make_domain();
    CHECK(dom.dim() == 2);
    auto k = c.make_kernel();
    REQUIRE(k.has_value());
    CHECK(k->alpha() == 1.5);
}

TEST_CASE("validation collects every issue") {
    std::string text = R"({
        "name": "broken",
        "domain": {"shape": "box", "dim": 3},
        "kernel": {"family": "fractional", "alpha": 2.5, "typo_key": 1},
        "a": 0.5,
        "grid": {"h": -1.0, "kappa": 0.2}
    })";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.issues.size() >= 5);
        std::string all = e.what();
        CHECK(all.find("alpha must lie in (0,2)") != std::string::npos);
        CHECK(all.find("typo_key") != std::string::npos);
        CHECK(all.find("kappa") != std::string::npos);
        CHECK(all.find("h must be positive") != std::string::npos);
        CHECK(all.find("shape") != std::string::npos);
    }

    // missing kernel section with a > 0
    try {
        parse_config(R"({"domain": {"shape": "ball"}, "a": 0.5})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("missing section 'kernel'") !=
              std::string::npos);
    }

    // unknown top-level key is named
    try {
        parse_config(R"({"domain": {"shape": "ball"}, "frobnicate": 1})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
    }
}

TEST_CASE("render round-trips") {
    std::string text = R"({
        "name": "rt",
        "domain": {"shape": "ellipse", "semi_axes": [1.3, 1.0]},
        "kernel": {"family": "subordinate", "mu1": 0.3, "mu2": 0.7},
        "a": 0.25,
        "problem": {"type": "semilinear", "f_const": -1.0, "H_coeff": 0.1},
        "grid": {"h": 0.03125},
        "expect": {"u0": 0.25, "u0_tol": 0.005}
    })";
    auto c = parse_config(text);
    std::string r1 = render(c);
    auto c2 = parse_config(r1);
    std::string r2 = render(c2);
    CHECK(r1 == r2);
    CHECK(c2.mu2 == doctest::Approx(0.7));
    CHECK(c2.expectations.at("u0") == doctest::Approx(0.25));
}

TEST_CASE("torsion pipeline writes the summary") {
    ExperimentConfig c;
    c.name = "torsion";
    c.shape = "ball";
    c.a = 0.0;
    c.kernel_family = "none";
    c.problem = "serrin";
    c.f_const = -1.0;
    c.h = 1.0 / 32.0;
    c.output_dir = out_dir("torsion");
    c.expectations["u0"] = 0.25;
    c.expectations["u0_tol"] = 5e-3;
    c.expectations["normal_dev_max"] = 0.02;

    int status = run(c);
    CHECK(status == 0);
    std::string summary = slurp(c.output_dir + "/summary.json");
    CHECK(summary.find("\"u0\"") != std::string::npos);
    CHECK(summary.find("\"normal_dev\"") != std::string::npos);
    CHECK(summary.find("\"serrin_constancy\": \"pass\"") != std::string::npos);
    CHECK(summary.find("\"u0_ok\": \"pass\"") != std::string::npos);
    CHECK(std::filesystem::exists(c.output_dir + "/solution.csv"));
    CHECK(std::filesystem::exists(c.output_dir + "/scan.csv"));
    CHECK(std::filesystem::exists(c.output_dir + "/MANIFEST.json"));
    CHECK(slurp(c.output_dir + "/MANIFEST.json").find("\"complete\"") !=
          std::string::npos);
}

TEST_CASE("serrin on the ellipse flags the constancy failure") {
    ExperimentConfig c;
    c.name = "serrin-ellipse";
    c.shape = "ellipse";
    c.semi_a = 1.3;
    c.semi_b = 1.0;
    c.a = 0.0;
    c.kernel_family = "none";
    c.problem = "serrin";
    c.h = 1.0 / 32.0;
    c.output_dir = out_dir("ellipse");
    c.expectations["normal_dev_max"] = 0.02;

    int status = run(c);
    CHECK(status == 2); // failed expectation
    std::string summary = slurp(c.output_dir + "/summary.json");
    CHECK(summary.find("\"serrin_constancy\": \"fail\"") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
    for (int variant = 0; variant < 2; ++variant) {
        ExperimentConfig c;
        c.name = "determinism";
        c.a = variant == 0 ? 0.0 : 0.5;
        c.kernel_family = variant == 0 ? "none" : "fractional";
        c.alpha = 1.5;
        c.problem = "linear";
        c.h = 1.0 / 16.0;
        c.diag_regularity = true;

        c.output_dir = out_dir("det_a");
        CHECK(run(c) == 0);
        std::string a1 = slurp(c.output_dir + "/solution.csv");
        std::string s1 = slurp(c.output_dir + "/summary.json");
        std::string r1 = slurp(c.output_dir + "/regularity.json");

        c.output_dir = out_dir("det_b");
        CHECK(run(c) == 0);
        CHECK(a1 == slurp(c.output_dir + "/solution.csv"));
        CHECK(s1 == slurp(c.output_dir + "/summary.json"));
        CHECK(r1 == slurp(c.output_dir + "/regularity.json"));
    }
}

TEST_CASE("semilinear and hjb pipelines run end to end") {
    ExperimentConfig c;
    c.name = "semi";
    c.problem = "semilinear";
    c.f_const = -1.0;
    c.f_linear = 0.1;
    c.H_coeff = 0.1;
    c.h = 1.0 / 16.0;
    c.output_dir = out_dir("semi");
    CHECK(run(c) == 0);
    CHECK(slurp(c.output_dir + "/summary.json").find("\"u0\"") !=
          std::string::npos);

    ExperimentConfig hc;
    hc.name = "hjb";
    hc.problem = "hjb";
    hc.f_const = 1.0; // L u + inf sup { b . Du + f } = 0
    hc.hjb_drifts = {{0.5, 0.0}, {-0.5, 0.0}};
    hc.h = 1.0 / 16.0;
    hc.output_dir = out_dir("hjb");
    CHECK(run(hc) == 0);
    std::string s = slurp(hc.output_dir + "/summary.json");
    CHECK(s.find("\"u0\"") != std::string::npos);
}

TEST_CASE("worker count does not change results") {
    ExperimentConfig c;
    c.name = "workers";
    c.a = 0.5;
    c.kernel_family = "fractional";
    c.alpha = 1.5;
    c.h = 1.0 / 16.0;
    c.workers = 1;
    c.output_dir = out_dir("w1");
    CHECK(run(c) == 0);
    std::string s1 = slurp(c.output_dir + "/solution.csv");
    c.workers = 2;
    c.output_dir = out_dir("w2");
    CHECK(run(c) == 0);
    CHECK(s1 == slurp(c.output_dir + "/solution.csv"));
}

TEST_CASE("kernel check writes the JSON block") {
    ExperimentConfig c;
    c.name = "kernel";
    c.kernel_family = "fractional";
    c.alpha = 1.2;
    c.a = 0.5;
    c.output_dir = out_dir("kernel");
    CHECK(run_kernel_check(c) == 0);
    std::string blob = slurp(c.output_dir + "/kernel_check.json");
    CHECK(blob.find("max_ratio_a") != std::string::npos);
    CHECK(blob.find("rho_estimate") != std::string::npos);
    CHECK(blob.find("violations") != std::string::npos);
}

TEST_CASE("failures leave a manifest behind") {
    ExperimentConfig c;
    c.name = "will-fail";
    c.problem = "serrin";
    c.f_const = 1.0; // solution is negative: serrin_solve rejects it
    c.h = 1.0 / 16.0;
    c.output_dir = out_dir("fail");
    CHECK(run(c) == 1);
    std::string manifest = slurp(c.output_dir + "/MANIFEST.json");
    CHECK(manifest.find("\"failed\"") != std::string::npos);
    CHECK(manifest.find("error") != std::string::npos);
}

TEST_SUITE_END();
