#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellhom/cli.hpp"
#include "cellhom/discrete.hpp"
#include "cellhom/io.hpp"
#include "cellhom/parallel.hpp"
#include "cellhom/random_fields.hpp"

using namespace cellhom;

namespace {

namespace fs = std::filesystem;

// fresh scratch directory per test run
fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "cellhom_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

// run_cli flips global thread/determinism state; restore it afterwards so
// test order does not matter
int cli(const std::vector<std::string>& args) {
    const int rc = run_cli(args);
    par::set_threads(0);
    par::set_deterministic(true);
    return rc;
}

// reports differ only in the timestamp line between identical runs
std::string strip_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.find("\"timestamp\"") == std::string::npos) out += line + '\n';
    return out;
}

nlohmann::json parse_report(const fs::path& p) { return nlohmann::json::parse(read_text(p)); }

} // namespace

TEST_CASE("verify green: clean exit and a well-formed report") {
    const fs::path out = scratch() / "green.json";
    CHECK(cli({"verify", "--suite", "green", "--grid", "8", "--seed", "11",
               "--out", out.string()}) == 0);

    const nlohmann::json j = parse_report(out);
    CHECK(j.at("schema") == "cellhom/1");
    CHECK(j.at("command") == "verify");
    CHECK(j.at("suite") == "green");
    CHECK(j.at("seed") == 11);
    CHECK(j.at("grid") == nlohmann::json({8, 8, 8}));
    CHECK(j.at("pass") == true);

    std::set<std::string> names;
    for (const auto& c : j.at("checks")) {
        names.insert(c.at("name").get<std::string>());
        CHECK(c.at("pass") == true);
        CHECK(c.contains("value"));
        CHECK(c.contains("threshold"));
    }
    CHECK(names == std::set<std::string>{"green.adjointness", "green.constant_divfree",
                                         "green.translation_kernel"});
}

TEST_CASE("verify all covers every advertised check") {
    const fs::path out = scratch() / "all.json";
    CHECK(cli({"verify", "--grid", "12", "--seed", "3", "--out", out.string()}) == 0);

    std::set<std::string> names;
    const nlohmann::json j = parse_report(out);
    for (const auto& c : j.at("checks")) {
        names.insert(c.at("name").get<std::string>());
        CHECK(c.at("pass") == true);
    }
    const std::set<std::string> want{
        "green.adjointness",        "green.constant_divfree",
        "green.translation_kernel", "korn.lambda_grad_lower",
        "korn.lambda_grad_upper",   "korn.sine_quotient_exact",
        "korn.constant_finite",     "traces.periodic_exact_zero",
        "traces.affine_jump",       "traces.divfree_flux",
        "traces.tamper_detected",   "donati.roundtrip_displacement",
        "donati.roundtrip_residual", "donati.divfree_fixed_point",
        "donati.pythagoras",        "donati.constant_case",
        "hillmandel.identity",      "hillmandel.affine_exact",
        "hillmandel.zero_mean",     "hillmandel.precondition_guard",
        "divcurl.oscillation_decay", "divcurl.oscillation_exact_zero",
        "divcurl.products_decay",   "compat.gradient_order_r",
        "compat.gradient_order_curlcurl", "compat.classification_agreement",
        "compat.contraction_identity", "compat.incompatible_r1212"};
    CHECK(names == want);
    CHECK(j.at("pass") == true);
}

TEST_CASE("thread count changes nothing but the timestamp") {
    const fs::path a = scratch() / "det_a.json";
    const fs::path b = scratch() / "det_b.json";
    const std::vector<std::string> base{"donati", "--grid", "8", "--seed", "29",
                                        "--tol",  "1e-9"};

    auto run = [&](const fs::path& out, const std::string& threads) {
        auto args = base;
        args.insert(args.end(), {"--threads", threads, "--out", out.string()});
        return cli(args);
    };
    CHECK(run(a, "1") == 0);
    CHECK(run(b, "4") == 0);
    CHECK(strip_timestamp(read_text(a)) == strip_timestamp(read_text(b)));

    // the binary field artifacts carry no timestamp at all
    CHECK(read_text(scratch() / "det_a.v.chof") == read_text(scratch() / "det_b.v.chof"));
    CHECK(read_text(scratch() / "det_a.residual.chof") ==
          read_text(scratch() / "det_b.residual.chof"));
}

TEST_CASE("config file drives a homogenize run") {
    const fs::path cfg = scratch() / "laminate.json";
    const fs::path out = scratch() / "laminate_report.json";
    {
        std::ofstream o(cfg);
        o << R"({
  "grid": [8, 8, 8],
  "material": {
    "kind": "laminate",
    "axis": 0,
    "theta": 0.5,
    "phase1": {"lambda": 1.0, "mu": 1.0},
    "phase2": {"lambda": 10.0, "mu": 5.0}
  },
  "tol": 1e-10,
  "seed": 7
})";
    }
    CHECK(cli({"homogenize", "--config", cfg.string(), "--out", out.string()}) == 0);

    const nlohmann::json j = parse_report(out);
    CHECK(j.at("material").at("kind") == "laminate");
    CHECK(j.at("volume_fractions") == nlohmann::json({0.5, 0.5}));
    CHECK(j.at("pass") == true);

    // closed form for this laminate: ch_11 = 120/23
    const double ch11 = j.at("ch_stress").at(0).at(0).get<double>();
    CHECK(ch11 == doctest::Approx(120.0 / 23.0).epsilon(1e-7));

    // six cell problems, each with a recorded iteration count and residual
    // (recomputed true residuals, so up to 1.25x the requested tolerance)
    CHECK(j.at("iterations").size() == 6);
    CHECK(j.at("residuals").size() == 6);
    for (const auto& r : j.at("residuals")) CHECK(r.get<double>() <= 1.25e-10);
}

TEST_CASE("config rejection paths") {
    const fs::path good = scratch() / "ok.json";
    { std::ofstream(good) << R"({"grid": 8, "tol": 1e-8})"; }

    const fs::path typo = scratch() / "typo.json";
    { std::ofstream(typo) << R"({"grid": 8, "tolerance": 1e-8})"; }
    CHECK(cli({"verify", "--suite", "green", "--config", typo.string()}) == 2);

    const fs::path junk = scratch() / "junk.json";
    { std::ofstream(junk) << "{ not json"; }
    CHECK(cli({"verify", "--suite", "green", "--config", junk.string()}) == 2);

    CHECK(cli({"verify", "--suite", "green", "--config",
               (scratch() / "missing.json").string()}) == 2);

    CHECK_THROWS_AS(load_config(typo.string()), ConfigError);
    CHECK_THROWS_WITH_AS(load_config(typo.string()),
                         doctest::Contains("tolerance"), ConfigError);
}

TEST_CASE("argument rejection paths") {
    const fs::path out = scratch() / "never.json";
    CHECK(cli({"verify", "--suite", "nonsense", "--grid", "8", "--out", out.string()}) == 2);
    CHECK(cli({"verify", "--suite", "green", "--grid", "8,8", "--out", out.string()}) == 2);
    CHECK(cli({"verify", "--suite", "green", "--grid", "1", "--out", out.string()}) == 2);
    CHECK(cli({"verify", "--suite", "green", "--grid", "8", "--tol", "-1",
               "--out", out.string()}) == 2);
    CHECK(cli({"nonexistent-command"}) == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("starving the solver reports a solver failure") {
    const fs::path cfg = scratch() / "contrast.json";
    {
        std::ofstream o(cfg);
        o << R"({
  "grid": 8,
  "material": {
    "kind": "random",
    "fraction": 0.5,
    "phase1": {"lambda": 1.0, "mu": 1.0},
    "phase2": {"lambda": 100.0, "mu": 100.0}
  },
  "tol": 1e-12,
  "max_iter": 3,
  "seed": 5
})";
    }
    CHECK(cli({"homogenize", "--config", cfg.string(),
               "--out", (scratch() / "never2.json").string()}) == 3);
}

TEST_CASE("divcurl command: field input round trip and rejection") {
    const Grid g(8, 8, 8);
    const SymGradOp op(g, Lattice::unit_cube());

    const fs::path okf = scratch() / "divfree.chof";
    save_field(okf, make_divfree(op, random_sym_field(g, op.lattice(), 13), 1e-11));

    const fs::path csv = scratch() / "records.csv";
    CHECK(cli({"divcurl", "--field", okf.string(), "--seed", "13",
               "--out", csv.string()}) == 0);
    const std::string text = read_text(csv);
    CHECK(text.rfind("n,value,limit,error\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 8); // header + 7 records

    const fs::path json_out = scratch() / "records.json";
    CHECK(cli({"divcurl", "--field", okf.string(), "--seed", "13",
               "--out", json_out.string()}) == 0);
    const nlohmann::json j = parse_report(json_out);
    CHECK(j.at("command") == "divcurl");
    CHECK(j.at("records").size() == 7);
    CHECK(j.at("fitted_exponent").get<double>() <= -0.9);

    // a raw random field is not divergence-free: detected, exit 4
    const fs::path badf = scratch() / "notdivfree.chof";
    save_field(badf, random_sym_field(g, op.lattice(), 14));
    CHECK(cli({"divcurl", "--field", badf.string(),
               "--out", (scratch() / "never3.csv").string()}) == 4);

    // unreadable input: exit 2
    const fs::path corrupt = scratch() / "corrupt.chof";
    { std::ofstream(corrupt, std::ios::binary) << "XXXX not a field file"; }
    CHECK(cli({"divcurl", "--field", corrupt.string(),
               "--out", (scratch() / "never4.csv").string()}) == 2);
}

TEST_CASE("donati command reads the grid from the field file") {
    const Grid g(6, 4, 8);
    const SymGradOp op(g, Lattice::unit_cube());
    Rng rng(23);
    const LPField u(random_mandel(rng), random_periodic(g, 24));
    const SymField e = op.sym_gradient(u);

    const fs::path in = scratch() / "strain.chof";
    save_field(in, e);

    const fs::path out = scratch() / "donati_file.json";
    CHECK(cli({"donati", "--field", in.string(), "--grid", "12", "--tol", "1e-10",
               "--out", out.string()}) == 0);

    const nlohmann::json j = parse_report(out);
    CHECK(j.at("grid") == nlohmann::json({6, 4, 8}));
    CHECK(j.at("source") == in.string());
    CHECK(j.at("residual_rel").get<double>() <= 1e-8);
    CHECK(j.at("pythagoras_defect").get<double>() <= 1e-9);
    for (int k = 0; k < 6; ++k)
        CHECK(j.at("recovered_average").at(k).get<double>() ==
              doctest::Approx(u.A[k]).epsilon(1e-8));

    // the recovered displacement artifact is a loadable displacement field
    const FieldFile v = load_field(scratch() / "donati_file.v.chof");
    CHECK(v.kind == FieldKind::displacement);
    CHECK(v.grid == g);
}

TEST_CASE("field container round trips") {
    const Grid g(4, 6, 2);
    const Lattice lat = Lattice::unit_cube();

    const VecField u = random_periodic(g, 33);
    const fs::path pu = scratch() / "u.chof";
    save_field(pu, u);
    const FieldFile fu = load_field(pu);
    CHECK(fu.kind == FieldKind::displacement);
    CHECK(as_displacement(fu).v == u.v);

    const SymField s = random_sym_field(g, lat, 34);
    const fs::path ps = scratch() / "s.chof";
    save_field(ps, s);
    const FieldFile fs_ = load_field(ps);
    CHECK(fs_.kind == FieldKind::quad_sym);
    CHECK(as_quad_sym(fs_, lat).s == s.s);

    // kind mismatch is a config error, not a crash
    CHECK_THROWS_AS(as_displacement(fs_), ConfigError);
    CHECK_THROWS_AS(as_quad_sym(fu, lat), ConfigError);

    // truncations are diagnosed, with the failure point spelled out
    std::vector<char> bytes;
    {
        std::ifstream in(ps, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    const fs::path pt = scratch() / "trunc.chof";
    {
        std::ofstream o(pt, std::ios::binary);
        o.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_WITH_AS(load_field(pt), doctest::Contains("match no field layout"), Error);

    const fs::path ph = scratch() / "headless.chof";
    {
        std::ofstream o(ph, std::ios::binary);
        o.write(bytes.data(), 10);
    }
    CHECK_THROWS_WITH_AS(load_field(ph), doctest::Contains("truncated header"), Error);
}
