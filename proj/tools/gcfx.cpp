// gcfx: global counterfactual explanations for graph classifiers.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcf/classifier.hpp"
#include "gcf/dataset.hpp"
#include "gcf/editmap.hpp"
#include "gcf/errors.hpp"
#include "gcf/explain.hpp"
#include "gcf/report.hpp"
#include "gcf/synthetic.hpp"
#include "gcf/vrrw.hpp"
#include "gcf/wire.hpp"

namespace fs = std::filesystem;
using namespace gcf;

namespace {

bool quiet = false;

void note(const std::string &msg) {
    if (!quiet)
        std::cerr << "gcfx: " << msg << '\n';
}

std::string default_output_dir() {
    if (const char *env = std::getenv("GCFX_OUTPUT_DIR"); env && *env)
        return env;
    return "gcfx-out";
}

std::uint16_t parse_port(const std::string &text) {
    std::size_t pos = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(text, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != text.size() || port == 0 || port > 65535)
        throw ConfigError("bad port '" + text + "'");
    return static_cast<std::uint16_t>(port);
}

/**
 * Classifier specs:
 *   builtin:<motif>   contains-triangle, contains-square, contains-star3
 *   model:<file>      WL linear model written by train-baseline
 *   exec:<command>    line-protocol classifier on a child process
 *   tcp:<host>:<port> line-protocol classifier on a socket
 */
std::shared_ptr<GraphModel> open_model(const std::string &spec, const LabelVocabulary &vocab) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("classifier spec '" + spec + "' needs a kind prefix (builtin:, model:, exec:, tcp:)");
    const auto kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (arg.empty())
        throw ConfigError("classifier spec '" + spec + "' has an empty argument");
    if (kind == "builtin")
        return MotifModel::named(arg);
    if (kind == "model") {
        auto m = std::make_shared<WlLinearModel>(WlLinearModel::load(arg));
        m->set_graph_vocabulary(vocab);
        return m;
    }
    if (kind == "exec")
        return std::make_shared<wire::ExternalModel>(wire::spawn_process(arg), vocab);
    if (kind == "tcp") {
        const auto last = arg.rfind(':');
        if (last == std::string::npos || last == 0)
            throw ConfigError("tcp classifier spec must be tcp:<host>:<port>");
        return std::make_shared<wire::ExternalModel>(wire::connect_tcp(arg.substr(0, last), parse_port(arg.substr(last + 1))),
                                                     vocab);
    }
    throw ConfigError("unknown classifier kind '" + kind + "'");
}

Dataset load_dataset(const std::string &dir, std::size_t min_label_freq) {
    auto ds = parse_dataset(dir);
    if (ds.dropped_self_loops)
        note("dropped " + std::to_string(ds.dropped_self_loops) + " self-loops");
    if (min_label_freq > 0) {
        const auto before = ds.size();
        ds = filter_rare_labels(ds, min_label_freq);
        note("rare-label filter kept " + std::to_string(ds.size()) + " of " + std::to_string(before) + " graphs");
    }
    return ds;
}

void write_atomic(const fs::path &path, const std::string &text) {
    auto tmp = path;
    tmp += ".tmp";
    write_text(tmp, text);
    fs::rename(tmp, path);
}

/**
 * Applies a key=value config file to `cmd` after the command line was parsed:
 * options given as flags win, unknown keys are errors. CLI11 only reads config
 * files for the top-level app, hence the manual pass.
 */
void apply_config(CLI::App *cmd, const std::string &path) {
    if (path.empty())
        return;
    if (!fs::exists(path))
        throw ConfigError("config file " + path + " not found");
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    } catch (const CLI::Error &e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    for (const auto &item : items) {
        if (item.name == "++" || item.name == "--")
            continue;
        if (!item.parents.empty())
            throw ConfigError("config file " + path + ": sections are not supported (" + item.fullname() + ")");
        if (item.name == "config")
            throw ConfigError("config file " + path + ": config files do not nest");
        auto *opt = cmd->get_option_no_throw((item.name.size() == 1 ? "-" : "--") + item.name);
        if (!opt)
            throw ConfigError("config file " + path + ": unknown key '" + item.name + "'");
        if (opt->count() > 0)
            continue;
        try {
            opt->add_result(item.inputs);
            opt->run_callback();
        } catch (const CLI::Error &e) {
            throw ConfigError("config file " + path + ": " + item.name + ": " + e.what());
        }
    }
}

struct ExplainArgs {
    std::string dataset;
    std::string classifier = "builtin:contains-triangle";
    int desired_class = 1;
    double threshold = 0.5;
    std::size_t min_label_freq = 0;
    double walk_theta = 0.05;
    double eval_theta = 0.10;
    double tau = 0.1;
    double alpha = 0.5;
    std::size_t iterations = 50000;
    std::size_t k = 10;
    std::optional<std::size_t> candidate_pool;
    std::optional<std::size_t> sample_cap;
    std::optional<std::size_t> counter_capacity;
    std::string ablation = "full";
    std::string coverage_scope = "top-n";
    std::string constraint;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::vector<double> thetas = ExplainConfig{}.theta_sweep;
    std::size_t trace_every = 1000;
    std::size_t eval_budget = kDefaultGedBudget;
    bool no_costs = false;
    std::string checkpoint;
    std::size_t checkpoint_every = 0;
    bool resume = false;
    std::string output_dir = default_output_dir();
};

void add_walk_options(CLI::App *cmd, ExplainArgs &a) {
    cmd->add_option("--walk-theta,--walk_theta", a.walk_theta, "Coverage radius used by the walk")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--tau", a.tau, "Teleport probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--alpha", a.alpha, "Importance mix between coverage and gain")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("-M,--iterations", a.iterations, "Walk steps")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("-n,--candidate-pool,--candidate_pool", a.candidate_pool,
                    "Top-n candidates kept for the summary (default: number of inputs)");
    cmd->add_option("--sample-cap,--sample_cap", a.sample_cap, "Max neighbours scored per step");
    cmd->add_option("--counter-capacity,--counter_capacity", a.counter_capacity,
                    "Space-saving counter capacity (default: exact counting)");
    cmd->add_option("--ablation", a.ablation, "full, or a +-joined list of NVR, NIF, NDT")->capture_default_str();
    cmd->add_option("--coverage-scope,--coverage_scope", a.coverage_scope,
                    "Candidates counted by the importance function: top-n or all")
        ->capture_default_str();
    cmd->add_option("--constraint", a.constraint, "Edit constraint, e.g. max-degree:4");
    cmd->add_option("--trace-every,--trace_every", a.trace_every, "Steps between convergence points (0: off)")
        ->capture_default_str();
    cmd->add_option("--checkpoint", a.checkpoint, "Walk checkpoint file");
    cmd->add_option("--checkpoint-every,--checkpoint_every", a.checkpoint_every, "Steps between checkpoints");
    cmd->add_flag("--resume", a.resume, "Continue from --checkpoint when it exists");
}

void add_common_options(CLI::App *cmd, ExplainArgs &a, bool dataset_required) {
    auto *d = cmd->add_option("--dataset", a.dataset, "Dataset directory (NAME_A.txt and friends)");
    if (dataset_required)
        d->required();
    cmd->add_option("--classifier", a.classifier, "builtin:NAME, model:FILE, exec:CMD or tcp:HOST:PORT")
        ->capture_default_str();
    cmd->add_option("--desired-class,--desired_class", a.desired_class, "Model class treated as desired")
        ->check(CLI::IsMember({0, 1}))
        ->capture_default_str();
    cmd->add_option("--threshold", a.threshold, "Decision threshold on the desired-class probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--min-label-freq,--min_label_freq", a.min_label_freq,
                    "Drop graphs with node labels rarer than this (0: keep all)")
        ->capture_default_str();
    cmd->add_option("--eval-theta,--eval_theta", a.eval_theta, "Coverage radius of the summary")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("-k", a.k, "Summary size")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--thetas", a.thetas, "Radii for the coverage-vs-theta table")->delimiter(',');
    cmd->add_option("--eval-budget,--eval_budget", a.eval_budget, "Search budget for cost distances")
        ->capture_default_str();
    cmd->add_flag("--no-costs,--no_costs", a.no_costs, "Skip recourse costs");
    cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
    cmd->add_option("--workers", a.workers, "Worker threads (results do not depend on it)")->capture_default_str();
    cmd->add_option("-o,--output-dir,--output_dir", a.output_dir, "Output directory (env GCFX_OUTPUT_DIR)")
        ->capture_default_str();
}

ExplainConfig explain_config(const ExplainArgs &a) {
    ExplainConfig c;
    auto &w = c.walk;
    w.walk_theta = a.walk_theta;
    w.eval_theta = a.eval_theta;
    w.tau = a.tau;
    w.alpha = a.alpha;
    w.iterations = a.iterations;
    w.candidate_pool = a.candidate_pool;
    w.counter_capacity = a.counter_capacity;
    w.sample_cap = a.sample_cap;
    w.ablations = Ablations::parse(a.ablation);
    w.coverage_scope = parse_coverage_scope(a.coverage_scope);
    if (!a.constraint.empty())
        w.constraint = parse_constraint(a.constraint);
    w.seed = a.seed;
    w.workers = a.workers;
    c.k = a.k;
    c.theta_sweep = a.thetas;
    c.trace_every = a.trace_every;
    c.eval_budget = a.eval_budget;
    c.compute_costs = !a.no_costs;
    return c;
}

void print_metrics(const Evaluation &ev, double theta) {
    std::cout << "coverage@" << theta << " = " << ev.coverage << '\n';
    if (ev.cost)
        std::cout << "cost mean " << ev.cost->mean << " median " << ev.cost->median << " p25 " << ev.cost->p25
                  << " p75 " << ev.cost->p75 << '\n';
    if (ev.inexact)
        std::cout << "inexact distances: " << ev.inexact << '\n';
}

void require_dataset(const ExplainArgs &a) {
    if (a.dataset.empty())
        throw ConfigError("--dataset is required (on the command line or in the config file)");
}

int cmd_explain(const ExplainArgs &a) {
    require_dataset(a);
    auto ds = load_dataset(a.dataset, a.min_label_freq);
    Classifier clf(open_model(a.classifier, ds.vocab), a.desired_class, a.threshold);
    auto sel = select_inputs(ds, clf);
    note(ds.name + ": " + std::to_string(ds.size()) + " graphs, " + std::to_string(sel.inputs.size()) +
         " inputs, " + std::to_string(sel.disconnected) + " disconnected");
    if (sel.inputs.empty())
        throw ConfigError("no connected graph of the dataset is classified undesired; nothing to explain");

    const auto cfg = explain_config(a);
    std::vector<LabeledGraph> inputs;
    for (auto i : sel.inputs)
        inputs.push_back(ds.graphs[i]);
    WalkEngine engine(inputs, ds.vocab, clf, cfg.walk);

    if (a.resume) {
        if (a.checkpoint.empty())
            throw ConfigError("--resume needs --checkpoint");
        if (fs::exists(a.checkpoint)) {
            engine.restore(read_text(a.checkpoint));
            note("resumed at step " + std::to_string(engine.state().step));
        }
    }
    ExplainHooks hooks;
    if (!a.checkpoint.empty() && a.checkpoint_every > 0) {
        hooks.checkpoint_every = a.checkpoint_every;
        hooks.on_checkpoint = [&](const WalkEngine &e) { write_atomic(a.checkpoint, e.checkpoint()); };
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto res = explain(engine, cfg, hooks);
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!a.checkpoint.empty())
        write_atomic(a.checkpoint, engine.checkpoint());
    note("walk finished in " + std::to_string(secs) + " s, " + std::to_string(res.candidates) + " candidates");

    RunInfo info;
    info.dataset = ds.name;
    info.classifier = clf.describe();
    info.desired_class = a.desired_class;
    info.dataset_graphs = ds.size();
    info.disconnected = sel.disconnected;
    info.input_indices = sel.inputs;
    info.config = cfg;
    for (const auto &p : write_reports(a.output_dir, info, res, ds.vocab))
        note("wrote " + p.string());
    print_metrics(res.evaluation, cfg.walk.eval_theta);
    return 0;
}

struct EvaluateArgs {
    ExplainArgs common;
    std::string summary;
    bool classifier_given = false;
    std::string output;
};

int cmd_evaluate(const EvaluateArgs &e) {
    const auto &a = e.common;
    require_dataset(a);
    auto ds = load_dataset(a.dataset, a.min_label_freq);
    auto vocab = ds.vocab;
    auto doc = parse_summary(read_text(e.summary), vocab, e.summary);
    if (doc.graphs.empty())
        throw ParseError(e.summary, 0, "summary holds no graphs");

    std::vector<std::size_t> chosen;
    if (e.classifier_given) {
        Classifier clf(open_model(a.classifier, ds.vocab), a.desired_class, a.threshold);
        chosen = select_inputs(ds, clf).inputs;
        note("inputs from classifier: " + std::to_string(chosen.size()));
    } else if (doc.input_indices && doc.dataset == ds.name) {
        chosen = *doc.input_indices;
        for (auto i : chosen)
            if (i >= ds.size())
                throw ParseError(e.summary, 0, "input index " + std::to_string(i) + " outside the dataset");
        note("inputs from summary: " + std::to_string(chosen.size()));
    } else {
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (is_connected(ds.graphs[i]))
                chosen.push_back(i);
        note("inputs: all " + std::to_string(chosen.size()) + " connected graphs");
    }
    if (chosen.empty())
        throw ConfigError("no inputs to evaluate against");
    std::vector<LabeledGraph> inputs;
    for (auto i : chosen)
        inputs.push_back(ds.graphs[i]);

    auto ev = evaluate_summary(doc.graphs, inputs, a.eval_theta, a.thetas, !a.no_costs, a.eval_budget, {},
                               a.workers);
    const auto text = metrics_json(ev, a.eval_theta).dump(2) + "\n";
    if (e.output.empty())
        std::cout << text;
    else {
        write_text(e.output, text);
        print_metrics(ev, a.eval_theta);
    }
    return 0;
}

struct TrainArgs {
    std::string dataset;
    std::size_t min_label_freq = 0;
    std::uint64_t seed = 0;
    std::string output = "model.json";
    TrainingOptions opts;
};

double accuracy(WlLinearModel &m, const Dataset &ds, const std::vector<std::size_t> &idx) {
    if (idx.empty())
        return 0.0;
    std::size_t ok = 0;
    for (auto i : idx)
        ok += (m.predict(ds.graphs[i]) >= 0.5 ? 1 : 0) == ds.labels[i];
    return static_cast<double>(ok) / static_cast<double>(idx.size());
}

int cmd_train(const TrainArgs &t) {
    auto ds = load_dataset(t.dataset, t.min_label_freq);
    std::size_t pos = 0;
    for (int l : ds.labels)
        pos += l == 1;
    if (pos == 0 || pos == ds.size())
        throw ConfigError("dataset " + ds.name + " holds a single class; nothing to train");
    auto split = stratified_split(ds.labels, t.seed);
    std::vector<LabeledGraph> graphs;
    std::vector<int> labels;
    for (auto i : split.train) {
        graphs.push_back(ds.graphs[i]);
        labels.push_back(ds.labels[i]);
    }
    auto model = WlLinearModel::train(graphs, labels, ds.vocab, t.opts);
    model.save(t.output);
    std::cout << "train accuracy " << accuracy(model, ds, split.train) << " (" << split.train.size() << ")\n"
              << "validation accuracy " << accuracy(model, ds, split.validation) << " (" << split.validation.size()
              << ")\n"
              << "test accuracy " << accuracy(model, ds, split.test) << " (" << split.test.size() << ")\n";
    note("wrote " + t.output);
    return 0;
}

int cmd_serve_check(const std::string &spec, std::size_t rounds) {
    LabelVocabulary vocab;
    const auto c = vocab.intern("C");
    const auto o = vocab.intern("O");
    // Triangle with a pendant: exercises two labels and a non-trivial edge list.
    LabeledGraph probe({c, c, c, o}, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
    auto model = open_model(spec, vocab);
    const auto t0 = std::chrono::steady_clock::now();
    double first = model->predict(probe);
    for (std::size_t r = 1; r < rounds; ++r) {
        double p = model->predict(probe);
        if (p != first)
            throw TransportError("endpoint answered " + std::to_string(p) + " after " + std::to_string(first) +
                                 " for the same probe");
    }
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::cout << model->describe() << ": ok, probe probability " << first << ", " << rounds << " round trips in "
              << ms << " ms\n";
    return 0;
}

int cmd_synth(const SyntheticOptions &o, const std::string &out) {
    auto ds = synthetic_motif_dataset(o);
    emit_dataset(ds, out);
    std::size_t pos = 0;
    for (int l : ds.labels)
        pos += l == 1;
    std::cout << "wrote " << ds.size() << " graphs (" << pos << " with a triangle) to " << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Global counterfactual explanations for graph classifiers"};
    app.require_subcommand(1);
    app.add_flag("-q,--quiet", quiet, "Suppress progress notes");

    ExplainArgs ex;
    auto *explain_cmd = app.add_subcommand("explain", "Run the explainer and write reports");
    std::string explain_config_file;
    explain_cmd->add_option("--config", explain_config_file, "key=value configuration file (flags take precedence)");
    add_common_options(explain_cmd, ex, false);
    add_walk_options(explain_cmd, ex);

    EvaluateArgs ev;
    auto *eval_cmd = app.add_subcommand("evaluate", "Score a summary against a dataset");
    std::string eval_config_file;
    eval_cmd->add_option("--config", eval_config_file, "key=value configuration file (flags take precedence)");
    add_common_options(eval_cmd, ev.common, false);
    eval_cmd->add_option("--summary", ev.summary, "summary.json to score")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--output", ev.output, "Write metrics JSON here instead of stdout");

    TrainArgs tr;
    auto *train_cmd = app.add_subcommand("train-baseline", "Train the WL linear baseline classifier");
    train_cmd->add_option("--dataset", tr.dataset, "Dataset directory")->required();
    train_cmd->add_option("--min-label-freq,--min_label_freq", tr.min_label_freq, "Rare-label filter");
    train_cmd->add_option("--seed", tr.seed, "Split seed")->capture_default_str();
    train_cmd->add_option("--output,-o", tr.output, "Model file")->capture_default_str();
    train_cmd->add_option("--rounds", tr.opts.rounds, "WL rounds")->check(CLI::Range(0, 10))->capture_default_str();
    train_cmd->add_option("--epochs", tr.opts.epochs, "Gradient steps")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--learning-rate", tr.opts.learning_rate)->capture_default_str();
    train_cmd->add_option("--l2", tr.opts.l2)->capture_default_str();

    std::string endpoint;
    std::size_t rounds = 1;
    auto *serve_cmd = app.add_subcommand("serve-check", "Ping an external classifier with a probe graph");
    serve_cmd->add_option("--classifier,endpoint", endpoint, "exec:CMD or tcp:HOST:PORT (any spec works)")->required();
    serve_cmd->add_option("--rounds", rounds, "Probe round trips")->check(CLI::PositiveNumber)->capture_default_str();

    SyntheticOptions so;
    std::string synth_out;
    auto *synth_cmd = app.add_subcommand("synth", "Write the synthetic triangle-motif dataset");
    synth_cmd->add_option("--output,-o", synth_out, "Target directory")->required();
    synth_cmd->add_option("--graphs", so.graphs)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--templates", so.templates)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--max-nodes", so.max_nodes)->capture_default_str();
    synth_cmd->add_option("--max-edits", so.max_edits)->capture_default_str();
    synth_cmd->add_option("--seed", so.seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*explain_cmd) {
            apply_config(explain_cmd, explain_config_file);
            return cmd_explain(ex);
        }
        if (*eval_cmd) {
            apply_config(eval_cmd, eval_config_file);
            ev.classifier_given = eval_cmd->count("--classifier") > 0;
            return cmd_evaluate(ev);
        }
        if (*train_cmd)
            return cmd_train(tr);
        if (*serve_cmd)
            return cmd_serve_check(endpoint, rounds);
        if (*synth_cmd)
            return cmd_synth(so, synth_out);
    } catch (const std::exception &e) {
        std::cerr << "gcfx: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
