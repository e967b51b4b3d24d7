#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>

#include <json.hpp>

#include "gcf/report.hpp"

namespace fs = std::filesystem;

namespace {

const std::string gcfx = GCFX_BINARY;
const std::string echo = GCF_ECHO_ORACLE;

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / ("gcfx-cli-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string &name) const { return (dir / name).string(); }
};

struct Result {
    int status = -1;
    std::string out;
};

Result run(const Workspace &ws, const std::string &args, const std::string &env = {}) {
    const auto out = ws.path("stdout.txt");
    const auto cmd = env + (env.empty() ? "" : " ") + gcfx + " -q " + args + " > " + out + " 2> " + ws.path("stderr.txt");
    const int raw = std::system(cmd.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = fs::exists(out) ? gcf::read_text(out) : std::string();
    return r;
}

const char *kReports[] = {"summary.json", "coverage_vs_k.tsv", "cost_table.tsv", "coverage_vs_theta.tsv",
                          "convergence.tsv"};

void check_same_reports(const std::string &a, const std::string &b) {
    for (const char *name : kReports)
        CHECK_MESSAGE(gcf::read_text(fs::path(a) / name) == gcf::read_text(fs::path(b) / name), name);
}

} // namespace

TEST_CASE("command line end to end") {
    Workspace ws;
    const auto data = ws.path("data");
    REQUIRE(run(ws, "synth --graphs 80 --seed 2 -o " + data).status == 0);
    const std::string walk = "explain --dataset " + data + " -M 400 -k 4 --seed 5";
    const std::string base = walk + " --trace-every 100";

    SUBCASE("identical reruns and worker counts") {
        REQUIRE(run(ws, base + " -o " + ws.path("r1")).status == 0);
        REQUIRE(run(ws, base + " -o " + ws.path("r2")).status == 0);
        REQUIRE(run(ws, base + " --workers 3 -o " + ws.path("r3")).status == 0);
        check_same_reports(ws.path("r1"), ws.path("r2"));
        check_same_reports(ws.path("r1"), ws.path("r3"));
        auto s = nlohmann::json::parse(gcf::read_text(ws.path("r1/summary.json")));
        CHECK(s["v"] == 1);
        CHECK(s["variant"] == "full");
        CHECK(s["graphs"].size() == 4);
        CHECK(s["walk"]["steps"] == 400);
    }

    SUBCASE("ablation variants are recorded") {
        REQUIRE(run(ws, base + " --ablation NIF -o " + ws.path("nif")).status == 0);
        const auto k = gcf::read_text(ws.path("nif/coverage_vs_k.tsv"));
        CHECK(k.starts_with("# variant=NIF "));
        CHECK(run(ws, base + " --ablation XYZ -o " + ws.path("bad")).status != 0);
    }

    SUBCASE("evaluate reproduces the explain metrics") {
        REQUIRE(run(ws, base + " -o " + ws.path("r1")).status == 0);
        auto r = run(ws, "evaluate --dataset " + data + " --summary " + ws.path("r1/summary.json"));
        REQUIRE(r.status == 0);
        auto s = nlohmann::json::parse(gcf::read_text(ws.path("r1/summary.json")));
        CHECK(nlohmann::json::parse(r.out) == s["metrics"]);
        // recomputing inputs with the classifier gives the same set
        auto r2 = run(ws, "evaluate --dataset " + data + " --classifier builtin:contains-triangle --summary " +
                              ws.path("r1/summary.json"));
        CHECK(nlohmann::json::parse(r2.out) == s["metrics"]);
        CHECK(run(ws, "evaluate --dataset " + data + " --summary " + ws.path("missing.json")).status != 0);
    }

    SUBCASE("config files sit between flags and defaults") {
        gcf::write_text(ws.path("run.ini"), "k=2\niterations=300\nseed=9\n");
        REQUIRE(run(ws, "explain --dataset " + data + " --config " + ws.path("run.ini") + " -o " + ws.path("c1"))
                    .status == 0);
        auto s = nlohmann::json::parse(gcf::read_text(ws.path("c1/summary.json")));
        CHECK(s["config"]["k"] == 2);
        CHECK(s["config"]["iterations"] == 300);
        CHECK(s["config"]["seed"] == 9);
        REQUIRE(run(ws, "explain --dataset " + data + " --config " + ws.path("run.ini") + " -k 3 -o " +
                            ws.path("c2"))
                    .status == 0);
        auto s2 = nlohmann::json::parse(gcf::read_text(ws.path("c2/summary.json")));
        CHECK(s2["config"]["k"] == 3);
        CHECK(s2["config"]["iterations"] == 300);
        CHECK(s2["config"]["tau"] == 0.1);
        gcf::write_text(ws.path("bad.ini"), "k=2\nbogus_key=1\n");
        CHECK(run(ws, "explain --dataset " + data + " --config " + ws.path("bad.ini")).status == 1);
        CHECK(gcf::read_text(ws.path("stderr.txt")).find("bogus_key") != std::string::npos);
        // the dataset itself may come from the file; dashes and underscores both work
        gcf::write_text(ws.path("full.ini"), "dataset=" + data + "\niterations=300\nwalk-theta=0.1\nno_costs=true\n");
        REQUIRE(run(ws, "explain --config " + ws.path("full.ini") + " -o " + ws.path("c3")).status == 0);
        auto s3 = nlohmann::json::parse(gcf::read_text(ws.path("c3/summary.json")));
        CHECK(s3["config"]["walk_theta"] == 0.1);
        CHECK(s3["metrics"]["cost"].is_null());
        CHECK(run(ws, "explain -M 10").status == 1);
    }

    SUBCASE("output directory from the environment") {
        REQUIRE(run(ws, base, "GCFX_OUTPUT_DIR=" + ws.path("envout")).status == 0);
        CHECK(fs::exists(ws.path("envout/summary.json")));
        REQUIRE(run(ws, base + " -o " + ws.path("flag"), "GCFX_OUTPUT_DIR=" + ws.path("unused")).status == 0);
        CHECK_FALSE(fs::exists(ws.path("unused")));
    }

    SUBCASE("checkpoint and resume") {
        const auto ck = ws.path("walk.ckpt");
        REQUIRE(run(ws, "explain --dataset " + data + " -M 200 -k 4 --seed 5 --checkpoint " + ck + " -o " +
                            ws.path("half"))
                    .status == 0);
        REQUIRE(fs::exists(ck));
        REQUIRE(run(ws, "explain --dataset " + data + " -M 400 -k 4 --seed 5 --trace-every 0 --checkpoint " + ck +
                            " --resume -o " + ws.path("resumed"))
                    .status == 0);
        REQUIRE(run(ws, walk + " --trace-every 0 -o " + ws.path("straight")).status == 0);
        auto a = nlohmann::json::parse(gcf::read_text(ws.path("resumed/summary.json")));
        auto b = nlohmann::json::parse(gcf::read_text(ws.path("straight/summary.json")));
        CHECK(a["graphs"] == b["graphs"]);
        CHECK(a["metrics"] == b["metrics"]);
    }

    SUBCASE("baseline training is deterministic and usable") {
        auto t1 = run(ws, "train-baseline --dataset " + data + " -o " + ws.path("m1.json"));
        REQUIRE(t1.status == 0);
        CHECK(t1.out.find("test accuracy") != std::string::npos);
        REQUIRE(run(ws, "train-baseline --dataset " + data + " -o " + ws.path("m2.json")).status == 0);
        CHECK(gcf::read_text(ws.path("m1.json")) == gcf::read_text(ws.path("m2.json")));
        CHECK(run(ws, base + " --classifier model:" + ws.path("m1.json") + " -o " + ws.path("wl")).status == 0);
    }

    SUBCASE("external classifier over the wire") {
        auto r = run(ws, "serve-check --rounds 20 'exec:" + echo + "'");
        REQUIRE(r.status == 0);
        CHECK(r.out.find("ok, probe probability 1") != std::string::npos);
        CHECK(run(ws, "serve-check 'exec:" + echo + " --fail-after 0'").status != 0);
        REQUIRE(run(ws, base + " --classifier 'exec:" + echo + " --reverse' -o " + ws.path("ext")).status == 0);
        REQUIRE(run(ws, base + " -o " + ws.path("r1")).status == 0);
        auto a = nlohmann::json::parse(gcf::read_text(ws.path("ext/summary.json")));
        auto b = nlohmann::json::parse(gcf::read_text(ws.path("r1/summary.json")));
        CHECK(a["graphs"] == b["graphs"]);
    }

    SUBCASE("nothing to explain is an error") {
        auto r = run(ws, "explain --dataset " + data + " --classifier exec:'" + echo + " --prob 1' -o " +
                             ws.path("none2"));
        CHECK(r.status == 1);
        CHECK(gcf::read_text(ws.path("stderr.txt")).find("nothing to explain") != std::string::npos);
        CHECK(run(ws, "explain").status != 0);
        CHECK(run(ws, "explain --dataset " + ws.path("nowhere")).status == 1);
    }
}
