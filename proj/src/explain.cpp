#include "gcf/explain.hpp"

#include <algorithm>

#include "gcf/errors.hpp"
#include "gcf/thread_pool.hpp"

namespace gcf {

Evaluation evaluate_summary(std::span<const LabeledGraph> graphs, std::span<const LabeledGraph> inputs,
                            double theta, std::span<const double> thetas, bool compute_costs,
                            std::optional<std::size_t> budget, const EditCostModel &costs, std::size_t workers) {
    double radius = theta;
    for (double t : thetas)
        radius = std::max(radius, t);

    Evaluation ev;
    ev.matrix.inputs = inputs.size();
    ev.matrix.rows.assign(graphs.size(), std::vector<Distance>(inputs.size()));
    WorkerPool pool(workers);
    pool.parallel_for(graphs.size() * inputs.size(), [&](std::size_t cell) {
        const auto r = cell / inputs.size(), i = cell % inputs.size();
        auto d = normalized_within(graphs[r], inputs[i], radius, costs);
        if (!d.finite() && compute_costs)
            d = normalized_ged(graphs[r], inputs[i], costs, budget);
        ev.matrix.rows[r][i] = d;
    });
    for (const auto &row : ev.matrix.rows)
        for (const auto &d : row)
            ev.inexact += !d.exact;

    std::vector<std::size_t> all(graphs.size());
    for (std::size_t r = 0; r < all.size(); ++r)
        all[r] = r;
    ev.coverage = cover(ev.matrix, all, theta);
    for (double t : thetas)
        ev.coverage_by_theta.emplace_back(t, cover(ev.matrix, all, t));
    if (compute_costs && !all.empty())
        ev.cost = cost_report(ev.matrix, all);
    std::vector<GraphKey> keys;
    for (const auto &g : graphs)
        keys.push_back(canonical_key(g));
    ev.assignment = nearest_assignment(ev.matrix, all, keys);
    return ev;
}

namespace {

CoverageMatrix pool_matrix(const CandidateSet &pool, std::size_t inputs, std::vector<CandidateRank> &ranks) {
    CoverageMatrix m;
    m.inputs = inputs;
    for (const auto &c : pool.items) {
        m.rows.push_back(c.row);
        ranks.push_back({c.visits, &c.key});
    }
    return m;
}

} // namespace

double pool_coverage(const CandidateSet &pool, std::size_t inputs, std::size_t k, double theta) {
    if (pool.items.empty())
        return 0.0;
    std::vector<CandidateRank> ranks;
    auto m = pool_matrix(pool, inputs, ranks);
    return greedy_summary(m, ranks, k, theta).coverage;
}

ExplainResult explain(WalkEngine &engine, const ExplainConfig &cfg, const ExplainHooks &hooks) {
    if (cfg.k == 0)
        throw ConfigError("summary size k must be at least 1");
    const auto &wc = engine.config();
    const auto n_inputs = engine.inputs().size();

    ExplainResult res;
    auto observer = [&](const WalkEngine &e) {
        const auto step = e.state().step;
        if (cfg.trace_every && step % cfg.trace_every == 0)
            res.convergence.emplace_back(step, pool_coverage(e.candidates(), n_inputs, cfg.k, wc.eval_theta));
        if (hooks.checkpoint_every && hooks.on_checkpoint && step % hooks.checkpoint_every == 0)
            hooks.on_checkpoint(e);
    };
    engine.run(wc.iterations, observer, 1);
    res.stats = engine.state().stats;

    const auto pool = engine.candidates();
    res.candidates = pool.items.size();
    std::vector<LabeledGraph> chosen;
    if (!pool.items.empty()) {
        std::vector<CandidateRank> ranks;
        auto m = pool_matrix(pool, n_inputs, ranks);
        auto s = greedy_summary(m, ranks, cfg.k, wc.eval_theta);
        res.padded = s.padded;
        for (std::size_t t = 0; t < s.chosen.size(); ++t) {
            const auto &c = pool.items[s.chosen[t]];
            res.summary.push_back({c.key, c.graph, c.visits, s.marginal[t], s.cumulative[t]});
            chosen.push_back(c.graph);
        }
    }
    res.evaluation = evaluate_summary(chosen, engine.inputs(), wc.eval_theta, cfg.theta_sweep, cfg.compute_costs,
                                      cfg.eval_budget, {}, wc.workers);
    return res;
}

ExplainResult explain(const std::vector<LabeledGraph> &inputs, const LabelVocabulary &vocab, Classifier &classifier,
                      const ExplainConfig &cfg) {
    WalkEngine engine(inputs, vocab, classifier, cfg.walk);
    return explain(engine, cfg);
}

RecourseSummary baseline_summary(std::span<const LabeledGraph> counterfactuals,
                                 std::span<const LabeledGraph> inputs, std::size_t k, double theta,
                                 std::size_t workers) {
    CoverageMatrix m;
    m.inputs = inputs.size();
    m.rows.assign(counterfactuals.size(), std::vector<Distance>(inputs.size()));
    WorkerPool pool(workers);
    pool.parallel_for(counterfactuals.size() * inputs.size(), [&](std::size_t cell) {
        const auto r = cell / inputs.size(), i = cell % inputs.size();
        m.rows[r][i] = normalized_within(counterfactuals[r], inputs[i], theta);
    });
    std::vector<GraphKey> keys;
    for (const auto &g : counterfactuals)
        keys.push_back(canonical_key(g));
    std::vector<CandidateRank> ranks;
    for (const auto &key : keys)
        ranks.push_back({0, &key});
    return greedy_summary(m, ranks, k, theta);
}

} // namespace gcf
