#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "safectl/cli.hpp"
#include "safectl/config.hpp"
#include "safectl/trace_io.hpp"

using namespace safectl;

namespace {

std::string base_config_text() {
    return R"({
  "model": "second_order",
  "limits": {"v_max": 1.0, "a_min": -1.0, "a_max": 1.0, "w_min": -1.0, "w_max": 1.0, "dt": 0.05},
  "obstacles": [{"cx": 2.0, "cy": 0.15, "radius": 0.25}],
  "index": {"mode": "discrete", "sigma": 0.1, "n": 1, "k": 2.5, "eta0": 0.05, "d_min": 0.5, "sigma_star": 0.01},
  "issa": {"adamba": {"epsilon": 0.001, "beta0": 0.2, "n_dirs": 10}},
  "ctrigger": {"enabled": true},
  "sim": {"dt": 0.05, "steps": 60},
  "policy": {"type": "goal_seek", "goal": [4.0, 0.0]},
  "seed": 5,
  "start": {"px": 0.0, "py": 0.0, "theta": 0.0, "v": 0.0}
})";
}

std::string write_tmp(const std::string& name, const std::string& text) {
    const std::string path = "/tmp/safectl_cfg_" + name;
    std::ofstream f(path);
    f << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("valid config round-trips through its own echo") {
        const RunConfig cfg = parse_config_json(base_config_text());
        const RunConfig again = parse_config_json(config_to_json(cfg));
        CHECK(config_to_json(cfg) == config_to_json(again));
        CHECK(again.index.k == cfg.index.k);
        CHECK(again.policy.goal_x == cfg.policy.goal_x);
        CHECK(again.seed == cfg.seed);
    }
    SUBCASE("unknown keys are rejected everywhere") {
        std::string bad = base_config_text();
        bad.insert(bad.find("\"sigma\""), "\"sgima\": 0.1, ");
        CHECK_THROWS_AS(parse_config_json(bad), ConfigError);

        std::string bad_root = base_config_text();
        bad_root.insert(1, "\"modle\": \"toy\", ");
        CHECK_THROWS_AS(parse_config_json(bad_root), ConfigError);
    }
    SUBCASE("malformed JSON is a parse error") {
        CHECK_THROWS_AS(parse_config_json("{ not json"), ConfigError);
    }
    SUBCASE("cross-field validation") {
        RunConfig cfg = parse_config_json(base_config_text());
        SUBCASE("discrete mode demands n = 1") {
            cfg.index.n = 2;
            CHECK_THROWS_AS(cfg.validate(), ConfigError);
        }
        SUBCASE("sim dt must match limits dt") {
            cfg.sim_dt = 0.1;
            CHECK_THROWS_AS(cfg.validate(), ConfigError);
        }
        SUBCASE("gain below the discrete rule bound is rejected") {
            cfg.index.k = 1.0;  // needs >= (eta0/dt + v_max)/a_eff = 2
            CHECK_THROWS_AS(cfg.validate(), ConfigError);
        }
        SUBCASE("trigger requires discrete mode") {
            cfg.mode = "continuous";
            cfg.index.eta0 = 0.0;
            cfg.index.sigma_star = 0.0;
            CHECK_THROWS_AS(cfg.validate(), ConfigError);
        }
        SUBCASE("valid as written") {
            CHECK_NOTHROW(cfg.validate());
        }
    }
}

TEST_CASE("synthesize command exit codes") {
    std::ostringstream out, err;
    SUBCASE("feasible discrete config") {
        const std::string path = write_tmp("ok.json", base_config_text());
        CHECK(cli::run_synthesize(path, true, out, err) == cli::kExitOk);
        CHECK(out.str().find("k_min") != std::string::npos);
        CHECK(out.str().find("slack") != std::string::npos);
    }
    SUBCASE("infeasible gain names the violated clause") {
        std::string text = base_config_text();
        text.replace(text.find("\"k\": 2.5"), 8, "\"k\": 1.0");
        const std::string path = write_tmp("bad_k.json", text);
        CHECK(cli::run_synthesize(path, false, out, err) == cli::kExitInfeasible);
        CHECK(err.str().find("gain clause") != std::string::npos);
    }
    SUBCASE("continuous closed-form clause") {
        std::string text = R"({
  "model": "second_order",
  "limits": {"v_max": 2.0, "a_min": -1.0, "a_max": 1.0, "w_min": -1.0, "w_max": 1.0, "dt": 0.05},
  "obstacles": [],
  "index": {"mode": "continuous", "sigma": 0.1, "n": 1, "k": 2.0, "d_min": 0.5},
  "sim": {"dt": 0.05, "steps": 10},
  "seed": 1
})";
        const std::string path = write_tmp("cont.json", text);
        CHECK(cli::run_synthesize(path, false, out, err) == cli::kExitOk);
        std::string infeasible = text;
        infeasible.replace(infeasible.find("\"k\": 2.0"), 8, "\"k\": 1.0");
        const std::string path2 = write_tmp("cont_bad.json", infeasible);
        CHECK(cli::run_synthesize(path2, false, out, err) == cli::kExitInfeasible);
        CHECK(err.str().find("braking clause") != std::string::npos);
    }
    SUBCASE("unreadable config") {
        CHECK(cli::run_synthesize("/nonexistent.json", false, out, err) == cli::kExitParse);
    }
}

TEST_CASE("simulate command") {
    std::ostringstream out, err;
    const std::string cfgp = write_tmp("sim.json", base_config_text());

    SUBCASE("writes trace and sidecar; summary printed") {
        CHECK(cli::run_simulate(cfgp, "/tmp/safectl_t1.csv", {}, out, err) == cli::kExitOk);
        const std::string csv = slurp("/tmp/safectl_t1.csv");
        CHECK(csv.rfind(kTraceHeader, 0) == 0);
        CHECK(out.str().find("interventions:") != std::string::npos);
        const Sidecar side = read_sidecar("/tmp/safectl_t1.csv");
        CHECK(side.props.has_value());  // trigger enabled -> props persisted
        CHECK(side.config.seed == 5);
    }
    SUBCASE("steps 0 gives a header-only file") {
        cli::SimOverrides ov;
        ov.steps = 0;
        CHECK(cli::run_simulate(cfgp, "/tmp/safectl_t0.csv", ov, out, err) == cli::kExitOk);
        CHECK(slurp("/tmp/safectl_t0.csv") == std::string(kTraceHeader) + "\n");
    }
    SUBCASE("identical config and seed give byte-identical outputs") {
        CHECK(cli::run_simulate(cfgp, "/tmp/safectl_a.csv", {}, out, err) == cli::kExitOk);
        CHECK(cli::run_simulate(cfgp, "/tmp/safectl_b.csv", {}, out, err) == cli::kExitOk);
        CHECK(slurp("/tmp/safectl_a.csv") == slurp("/tmp/safectl_b.csv"));
        CHECK(slurp(sidecar_path("/tmp/safectl_a.csv")) == slurp(sidecar_path("/tmp/safectl_b.csv")));
        cli::SimOverrides ov;
        ov.seed = 6;
        CHECK(cli::run_simulate(cfgp, "/tmp/safectl_c.csv", ov, out, err) == cli::kExitOk);
        CHECK(slurp("/tmp/safectl_a.csv") != slurp("/tmp/safectl_c.csv"));
    }
    SUBCASE("sidecar config re-parses into an identical run configuration") {
        CHECK(cli::run_simulate(cfgp, "/tmp/safectl_rt.csv", {}, out, err) == cli::kExitOk);
        const Sidecar side = read_sidecar("/tmp/safectl_rt.csv");
        const RunConfig original = load_config(cfgp);
        CHECK(config_to_json(side.config) == config_to_json(original));
    }
}

TEST_CASE("verify command") {
    std::ostringstream out, err;
    const std::string cfgp = write_tmp("ver.json", base_config_text());

    SUBCASE("clean safeguarded trace verifies") {
        REQUIRE(cli::run_simulate(cfgp, "/tmp/safectl_v.csv", {}, out, err) == cli::kExitOk);
        CHECK(cli::run_verify("/tmp/safectl_v.csv", cfgp, out, err) == cli::kExitOk);
        CHECK(out.str().find("forward invariance: pass") != std::string::npos);
    }
    SUBCASE("schema mismatch") {
        std::ofstream f("/tmp/safectl_badschema.csv");
        f << "t,px,py\n0,0,0\n";
        f.close();
        CHECK(cli::run_verify("/tmp/safectl_badschema.csv", cfgp, out, err) == cli::kExitSchema);
    }
    SUBCASE("violating trace is flagged with the step") {
        EpisodeTrace trace;
        for (int t = 0; t < 5; ++t) {
            TraceStep s;
            s.t = t;
            s.phi = (t == 3) ? 0.2 : -0.1;
            s.phi0 = (t == 3) ? 0.05 : -0.2;
            s.u_nominal = {0.0, 0.0};
            s.u_applied = {0.0, 0.0};
            trace.steps.push_back(s);
        }
        write_trace_csv("/tmp/safectl_crash.csv", trace);
        CHECK(cli::run_verify("/tmp/safectl_crash.csv", cfgp, out, err) == cli::kExitViolation);
        CHECK(out.str().find("step 3") != std::string::npos);
    }
    SUBCASE("never-entered trace passes with the flag") {
        EpisodeTrace trace;
        for (int t = 0; t < 5; ++t) {
            TraceStep s;
            s.t = t;
            s.phi = 0.5;
            s.phi0 = 0.1;
            s.u_nominal = {0.0, 0.0};
            s.u_applied = {0.0, 0.0};
            trace.steps.push_back(s);
        }
        write_trace_csv("/tmp/safectl_ne.csv", trace);
        CHECK(cli::run_verify("/tmp/safectl_ne.csv", cfgp, out, err) == cli::kExitOk);
        CHECK(out.str().find("never-entered") != std::string::npos);
    }
}

TEST_CASE("scan command") {
    std::ostringstream out, err;
    SUBCASE("deeply safe state is all SAFE") {
        std::string text = base_config_text();
        text.replace(text.find("\"cx\": 2.0"), 9, "\"cx\": 40.0");
        const std::string cfgp = write_tmp("scan.json", text);
        CHECK(cli::run_scan(cfgp, "0,0,0,0.2", "/tmp/safectl_scan.csv", 21, out, err) == cli::kExitOk);
        const std::string csv = slurp("/tmp/safectl_scan.csv");
        CHECK(csv.find("UNSAFE") == std::string::npos);
        CHECK(csv.rfind("u1,u2,delta_phi,status", 0) == 0);
        CHECK(out.str().find("safe_fraction: 1") != std::string::npos);
    }
    SUBCASE("distance-only index at a crafted unsafe state is all UNSAFE") {
        std::string text = R"({
  "model": "second_order",
  "limits": {"v_max": 1.0, "a_min": -1.0, "a_max": 1.0, "w_min": -1.0, "w_max": 1.0, "dt": 0.05},
  "obstacles": [{"cx": 0.52, "cy": 0.0, "radius": 0.25}],
  "index": {"mode": "continuous", "sigma": 0.05, "n": 1, "k": 0.0, "d_min": 0.5},
  "sim": {"dt": 0.05, "steps": 10},
  "seed": 1,
  "start": {"px": 0.0, "py": 0.0, "theta": 0.0, "v": 1.0}
})";
        const std::string cfgp = write_tmp("scan_k0.json", text);
        CHECK(cli::run_scan(cfgp, "", "/tmp/safectl_scan0.csv", 41, out, err) == cli::kExitOk);
        const std::string csv = slurp("/tmp/safectl_scan0.csv");
        CHECK(csv.find(",SAFE") == std::string::npos);
        CHECK(out.str().find("safe_fraction: 0") != std::string::npos);
    }
}

TEST_CASE("bench command") {
    std::ostringstream out, err;
    const std::string cfgp = write_tmp("bench.json", base_config_text());

    SUBCASE("produces one row per direction count") {
        CHECK(cli::run_bench(cfgp, 40, {3, 5, 10, 20}, "/tmp/safectl_bench.csv", out, err) == cli::kExitOk);
        const std::string csv = slurp("/tmp/safectl_bench.csv");
        int rows = 0;
        for (char c : csv) rows += c == '\n';
        CHECK(rows == 5);  // header + 4
        CHECK(csv.rfind("n_dirs,success_rate,mean_candidates,mean_queries,wall_ms", 0) == 0);
    }
    SUBCASE("zero direction count is an invalid configuration") {
        CHECK(cli::run_bench(cfgp, 10, {0}, "", out, err) == cli::kExitParse);
    }
}

TEST_CASE("toy command on a config override keeps the documented default placement separate") {
    std::ostringstream out, err;
    CHECK(cli::run_toy("discrete", "", "/tmp/safectl_toy.csv", {}, out, err) == cli::kExitOk);
    CHECK(out.str().find("first_nonpositive_step") != std::string::npos);
    const Sidecar side = read_sidecar("/tmp/safectl_toy.csv");
    CHECK(side.config.obstacles.size() == 1);
    CHECK(side.config.obstacles[0].cx == 1.0);
    CHECK(side.config.obstacles[0].cy == 0.2);
}

TEST_CASE("shipped example configs stay valid") {
    CHECK_NOTHROW(load_config(std::string(SAFECTL_SOURCE_DIR) + "/configs/second_order_discrete.json").validate());
    CHECK_NOTHROW(load_config(std::string(SAFECTL_SOURCE_DIR) + "/configs/toy_discrete.json").validate());
}
