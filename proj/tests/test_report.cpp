#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include <unistd.h>

#include "gcf/errors.hpp"
#include "gcf/report.hpp"
#include "gcf/synthetic.hpp"
#include "oracles.hpp"

using namespace gcf;
namespace fs = std::filesystem;

namespace {

struct SmallRun {
    Dataset ds;
    std::vector<LabeledGraph> inputs;
    RunInfo info;
    ExplainResult res;
};

SmallRun small_run() {
    SmallRun r;
    r.ds = synthetic_motif_dataset({});
    Classifier clf(MotifModel::contains_triangle());
    auto sel = select_inputs(r.ds, clf);
    sel.inputs.resize(12);
    for (auto i : sel.inputs)
        r.inputs.push_back(r.ds.graphs[i]);
    ExplainConfig cfg;
    cfg.walk.iterations = 300;
    cfg.walk.seed = 3;
    cfg.k = 3;
    cfg.trace_every = 100;
    r.res = explain(r.inputs, r.ds.vocab, clf, cfg);
    r.info.dataset = r.ds.name;
    r.info.classifier = "builtin:contains-triangle";
    r.info.dataset_graphs = r.ds.size();
    r.info.input_indices = sel.inputs;
    r.info.config = cfg;
    return r;
}

} // namespace

TEST_CASE("summary document round-trips and re-evaluates identically") {
    auto run = small_run();
    REQUIRE(run.res.summary.size() == 3);
    const auto text = summary_json(run.info, run.res, run.ds.vocab);
    CHECK(text == summary_json(run.info, run.res, run.ds.vocab));

    LabelVocabulary vocab = run.ds.vocab;
    auto doc = parse_summary(text, vocab);
    CHECK(vocab == run.ds.vocab);
    CHECK(doc.dataset == run.ds.name);
    CHECK(doc.variant == "full");
    CHECK(doc.eval_theta == 0.10);
    CHECK(doc.thetas == run.info.config.theta_sweep);
    REQUIRE(doc.input_indices);
    CHECK(*doc.input_indices == run.info.input_indices);
    REQUIRE(doc.graphs.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(doc.graphs[i] == run.res.summary[i].graph);

    auto ev = evaluate_summary(doc.graphs, run.inputs, doc.eval_theta, doc.thetas, true, kDefaultGedBudget);
    CHECK(nlohmann::json::parse(metrics_json(ev, doc.eval_theta).dump()) == doc.metrics);
    CHECK(ev.coverage == run.res.evaluation.coverage);
    if (!run.res.summary.empty())
        CHECK(run.res.summary.back().cumulative == doctest::Approx(ev.coverage));
}

TEST_CASE("report files") {
    auto run = small_run();
    const auto dir = fs::temp_directory_path() / ("gcf-report-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    auto paths = write_reports(dir, run.info, run.res, run.ds.vocab);
    CHECK(paths.size() == 5);
    for (const char *name : {"summary.json", "coverage_vs_k.tsv", "cost_table.tsv", "coverage_vs_theta.tsv",
                             "convergence.tsv"})
        CHECK(fs::exists(dir / name));
    const auto k = read_text(dir / "coverage_vs_k.tsv");
    CHECK(k.starts_with("# variant=full theta=0.100000\nk\tmarginal\tcoverage\n1\t"));
    const auto conv = read_text(dir / "convergence.tsv");
    CHECK(conv.find("\n100\t") != std::string::npos);
    CHECK(conv.find("\n300\t") != std::string::npos);
    const auto theta = read_text(dir / "coverage_vs_theta.tsv");
    CHECK(std::count(theta.begin(), theta.end(), '\n') == 2 + 9);
    fs::remove_all(dir);
    CHECK_THROWS_AS(read_text(dir / "summary.json"), Error);
}

TEST_CASE("single graph coverage matches the oracle distance") {
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        auto g = oracle::random_connected(rng, 2 + uniform_index(rng, 3), 2, uniform_index(rng, 2));
        std::vector<LabeledGraph> inputs;
        for (int i = 0; i < 6; ++i)
            inputs.push_back(oracle::random_connected(rng, 2 + uniform_index(rng, 3), 2, uniform_index(rng, 2)));
        const double theta = 0.2;
        std::size_t hits = 0;
        double total = 0;
        for (const auto &in : inputs) {
            const double d = oracle::ged(g, in) / size_normalizer(g, in);
            hits += d <= theta;
            total += d;
        }
        const std::vector<double> thetas{theta};
        std::vector<LabeledGraph> one{g};
        auto ev = evaluate_summary(one, inputs, theta, thetas, true, std::nullopt);
        CHECK(ev.coverage == doctest::Approx(static_cast<double>(hits) / 6));
        REQUIRE(ev.cost);
        CHECK(ev.cost->mean == doctest::Approx(total / 6));
        CHECK(ev.inexact == 0);
    }
}

TEST_CASE("inputs explain themselves at zero cost") {
    Rng rng(23);
    std::vector<LabeledGraph> inputs;
    for (int i = 0; i < 8; ++i)
        inputs.push_back(oracle::random_connected(rng, 3 + uniform_index(rng, 3), 2, uniform_index(rng, 3)));
    const std::vector<double> thetas{0.0};
    auto self = evaluate_summary(inputs, inputs, 0.0, thetas, true, std::nullopt);
    CHECK(self.coverage == 1.0);
    CHECK(self.cost->mean == 0.0);
    CHECK(self.cost->p75 == 0.0);

    // at radius zero only isomorphic copies count
    std::vector<LabeledGraph> one{inputs[0]};
    auto ev = evaluate_summary(one, inputs, 0.0, thetas, false, std::nullopt);
    std::size_t iso = 0;
    for (const auto &in : inputs)
        iso += oracle::isomorphic(in, inputs[0]);
    CHECK(ev.coverage == doctest::Approx(static_cast<double>(iso) / 8));
    CHECK_FALSE(ev.cost);
}

TEST_CASE("malformed summaries") {
    LabelVocabulary vocab;
    for (const char *text : {"", "{", "[]", R"({"v":2})", R"({"v":1})",
                             R"({"v":1,"dataset":"X","variant":"full","config":{"eval_theta":0.1,"thetas":[]},
                                 "graphs":[{"nodes":["C"],"edges":[[0,0]]}],"metrics":{}})"})
        CHECK_THROWS_AS(parse_summary(text, vocab), ParseError);
}
