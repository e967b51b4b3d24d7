#include "gcf/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gcf/errors.hpp"

namespace gcf {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Fixed-precision decimal for the tabular files; the JSON keeps full doubles.
std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

ojson distance_json(const Distance &d) {
    ojson j;
    if (d.finite())
        j["distance"] = d.value;
    else
        j["distance"] = nullptr;
    j["exact"] = d.exact;
    return j;
}

} // namespace

nlohmann::ordered_json graph_to_json(const LabeledGraph &g, const LabelVocabulary &vocab) {
    ojson j;
    auto nodes = ojson::array();
    for (auto l : g.labels())
        nodes.push_back(vocab.symbol(l));
    auto edges = ojson::array();
    for (auto [u, v] : g.edges())
        edges.push_back({u, v});
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j;
}

LabeledGraph graph_from_json(const nlohmann::json &j, LabelVocabulary &vocab) {
    std::vector<Label> labels;
    for (const auto &s : j.at("nodes"))
        labels.push_back(vocab.intern(s.get<std::string>()));
    std::vector<Edge> edges;
    for (const auto &e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw InvalidGraph("edge must be a [u, v] pair");
        edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    }
    return LabeledGraph(std::move(labels), std::move(edges));
}

nlohmann::ordered_json metrics_json(const Evaluation &ev, double theta) {
    ojson m;
    m["theta"] = theta;
    m["coverage"] = ev.coverage;
    if (ev.cost) {
        m["cost"] = {{"mean", ev.cost->mean}, {"median", ev.cost->median}, {"p25", ev.cost->p25},
                     {"p75", ev.cost->p75}};
    } else {
        m["cost"] = nullptr;
    }
    auto sweep = ojson::array();
    for (auto [t, c] : ev.coverage_by_theta)
        sweep.push_back({{"theta", t}, {"coverage", c}});
    m["coverage_by_theta"] = std::move(sweep);
    m["inexact_distances"] = ev.inexact;
    auto assign = ojson::array();
    for (std::size_t i = 0; i < ev.assignment.size(); ++i) {
        ojson a;
        if (ev.assignment[i]) {
            a["graph"] = *ev.assignment[i];
            const auto &d = ev.matrix.rows[*ev.assignment[i]][i];
            a.update(distance_json(d));
            a["covered"] = within_radius(d.value, theta);
        } else {
            a["graph"] = nullptr;
            a["distance"] = nullptr;
            a["exact"] = false;
            a["covered"] = false;
        }
        assign.push_back(std::move(a));
    }
    m["assignment"] = std::move(assign);
    return m;
}

std::string summary_json(const RunInfo &info, const ExplainResult &res, const LabelVocabulary &vocab) {
    const auto &c = info.config;
    const auto &w = c.walk;
    ojson j;
    j["v"] = 1;
    j["kind"] = "gcf-summary";
    j["dataset"] = info.dataset;
    j["classifier"] = info.classifier;
    j["desired_class"] = info.desired_class;
    j["variant"] = w.ablations.name();
    ojson cfg;
    cfg["walk_theta"] = w.walk_theta;
    cfg["eval_theta"] = w.eval_theta;
    cfg["tau"] = w.tau;
    cfg["alpha"] = w.alpha;
    cfg["iterations"] = w.iterations;
    cfg["k"] = c.k;
    cfg["candidate_pool"] = w.pool_size(info.input_indices.size());
    if (w.counter_capacity)
        cfg["counter_capacity"] = *w.counter_capacity;
    else
        cfg["counter_capacity"] = nullptr;
    if (w.sample_cap)
        cfg["sample_cap"] = *w.sample_cap;
    else
        cfg["sample_cap"] = nullptr;
    cfg["coverage_scope"] = to_string(w.coverage_scope);
    cfg["seed"] = w.seed;
    cfg["thetas"] = c.theta_sweep;
    j["config"] = std::move(cfg);
    j["dataset_graphs"] = info.dataset_graphs;
    j["disconnected"] = info.disconnected;
    j["inputs"] = info.input_indices;
    j["candidates"] = res.candidates;
    j["padded"] = res.padded;

    auto graphs = ojson::array();
    for (const auto &s : res.summary) {
        auto g = graph_to_json(s.graph, vocab);
        g["key"] = s.key.hex();
        g["visits"] = s.visits;
        g["marginal"] = s.marginal;
        g["cumulative"] = s.cumulative;
        graphs.push_back(std::move(g));
    }
    j["graphs"] = std::move(graphs);
    j["metrics"] = metrics_json(res.evaluation, w.eval_theta);
    auto conv = ojson::array();
    for (auto [step, cov] : res.convergence)
        conv.push_back({{"iteration", step}, {"coverage", cov}});
    j["convergence"] = std::move(conv);
    const auto &st = res.stats;
    j["walk"] = {{"steps", st.steps},
                 {"teleports", st.teleports},
                 {"forced_teleports", st.forced_teleports},
                 {"uniform_fallbacks", st.uniform_fallbacks},
                 {"scored_neighbors", st.scored_neighbors},
                 {"reinforced_visits", st.reinforced_visits},
                 {"evictions", st.evictions},
                 {"mean_degree", st.mean_degree()}};
    return j.dump(2) + "\n";
}

std::vector<fs::path> write_reports(const fs::path &dir, const RunInfo &info, const ExplainResult &res,
                                    const LabelVocabulary &vocab) {
    fs::create_directories(dir);
    std::vector<fs::path> out;
    auto put = [&](const char *name, const std::string &text) {
        out.push_back(dir / name);
        write_text(out.back(), text);
    };
    const auto variant = info.config.walk.ablations.name();
    put("summary.json", summary_json(info, res, vocab));

    std::ostringstream k;
    k << "# variant=" << variant << " theta=" << num(info.config.walk.eval_theta) << "\n";
    k << "k\tmarginal\tcoverage\n";
    for (std::size_t i = 0; i < res.summary.size(); ++i)
        k << i + 1 << '\t' << num(res.summary[i].marginal) << '\t' << num(res.summary[i].cumulative) << '\n';
    put("coverage_vs_k.tsv", k.str());

    std::ostringstream cost;
    cost << "# variant=" << variant << " k=" << res.summary.size() << "\n";
    cost << "aggregation\tcost\n";
    if (const auto &c = res.evaluation.cost) {
        cost << "mean\t" << num(c->mean) << "\nmedian\t" << num(c->median) << "\np25\t" << num(c->p25) << "\np75\t"
             << num(c->p75) << '\n';
    }
    put("cost_table.tsv", cost.str());

    std::ostringstream th;
    th << "# variant=" << variant << " k=" << res.summary.size() << "\n";
    th << "theta\tcoverage\n";
    for (auto [t, c] : res.evaluation.coverage_by_theta)
        th << num(t) << '\t' << num(c) << '\n';
    put("coverage_vs_theta.tsv", th.str());

    std::ostringstream conv;
    conv << "# variant=" << variant << " k=" << info.config.k << " theta=" << num(info.config.walk.eval_theta)
         << "\n";
    conv << "iteration\tcoverage\n";
    for (auto [step, c] : res.convergence)
        conv << step << '\t' << num(c) << '\n';
    put("convergence.tsv", conv.str());
    return out;
}

SummaryDocument parse_summary(const std::string &text, LabelVocabulary &vocab, const std::string &origin) {
    try {
        auto j = nlohmann::json::parse(text);
        if (j.at("v").get<int>() != 1)
            throw ParseError(origin, 0, "unsupported summary version");
        SummaryDocument doc;
        doc.dataset = j.value("dataset", std::string());
        doc.variant = j.value("variant", std::string("full"));
        if (j.contains("config")) {
            const auto &c = j.at("config");
            doc.eval_theta = c.value("eval_theta", 0.1);
            if (c.contains("thetas"))
                doc.thetas = c.at("thetas").get<std::vector<double>>();
        }
        for (const auto &g : j.at("graphs"))
            doc.graphs.push_back(graph_from_json(g, vocab));
        if (j.contains("inputs"))
            doc.input_indices = j.at("inputs").get<std::vector<std::size_t>>();
        if (j.contains("metrics"))
            doc.metrics = j.at("metrics");
        return doc;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(origin, 0, e.what());
    } catch (const InvalidGraph &e) {
        throw ParseError(origin, 0, e.what());
    }
}

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("failed writing " + path.string());
}

} // namespace gcf
