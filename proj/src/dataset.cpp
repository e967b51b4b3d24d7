#include "gcf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "gcf/errors.hpp"
#include "gcf/rng.hpp"

namespace gcf {

namespace fs = std::filesystem;

namespace {

// One row of integers per non-blank line.
struct IntTable {
    std::string file;
    std::vector<std::vector<long long>> rows;
    std::vector<std::size_t> line_of;
};

IntTable read_table(const fs::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    IntTable t;
    t.file = path.filename().string();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::vector<long long> row;
        const char *p = line.data();
        const char *end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r'))
                ++p;
            if (p == end)
                break;
            long long v = 0;
            auto [q, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t' && *q != ',' && *q != '\r'))
                throw ParseError(t.file, lineno, "not an integer: '" + line + "'");
            row.push_back(v);
            p = q;
        }
        if (row.empty())
            continue;
        t.rows.push_back(std::move(row));
        t.line_of.push_back(lineno);
    }
    return t;
}

void expect_columns(const IntTable &t, std::size_t i, std::size_t cols) {
    if (t.rows[i].size() != cols)
        throw ParseError(t.file, t.line_of[i], "expected " + std::to_string(cols) + " value(s)");
}

std::string prefix_of(const fs::path &dir) {
    if (!fs::is_directory(dir))
        throw ParseError(dir.string(), 0, "not a directory");
    std::vector<std::string> found;
    for (const auto &e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() > 6 && name.ends_with("_A.txt"))
            found.push_back(name.substr(0, name.size() - 6));
    }
    if (found.empty())
        throw ParseError(dir.string(), 0, "no *_A.txt edge file");
    if (found.size() > 1)
        throw ParseError(dir.string(), 0, "more than one *_A.txt edge file");
    return found.front();
}

} // namespace

std::vector<std::size_t> count_labels(const std::vector<LabeledGraph> &graphs, std::size_t vocab_size) {
    std::vector<std::size_t> freq(vocab_size, 0);
    for (const auto &g : graphs)
        for (auto l : g.labels())
            ++freq.at(l);
    return freq;
}

Dataset parse_dataset(const fs::path &dir) {
    const auto name = prefix_of(dir);
    auto file = [&](const char *suffix) {
        auto p = dir / (name + suffix);
        if (!fs::exists(p))
            throw ParseError(p.string(), 0, "missing file");
        return read_table(p);
    };
    const auto A = file("_A.txt");
    const auto indicator = file("_graph_indicator.txt");
    const auto graph_labels = file("_graph_labels.txt");
    const auto node_labels = file("_node_labels.txt");

    const std::size_t graphs = graph_labels.rows.size();
    const std::size_t nodes = indicator.rows.size();
    if (graphs == 0)
        throw ParseError(graph_labels.file, 0, "no graphs");
    if (node_labels.rows.size() != nodes)
        throw ParseError(node_labels.file, node_labels.line_of.empty() ? 0 : node_labels.line_of.back(),
                         "expected one label per node (" + std::to_string(nodes) + ")");

    // Class labels.
    std::set<long long> classes;
    for (std::size_t i = 0; i < graphs; ++i) {
        expect_columns(graph_labels, i, 1);
        classes.insert(graph_labels.rows[i][0]);
    }
    if (classes.size() > 2)
        throw ParseError(graph_labels.file, 0, "more than two graph classes");
    const bool zero_one = std::all_of(classes.begin(), classes.end(), [](long long c) { return c == 0 || c == 1; });

    Dataset ds;
    ds.name = name;
    ds.labels.resize(graphs);
    for (std::size_t i = 0; i < graphs; ++i) {
        const auto c = graph_labels.rows[i][0];
        if (zero_one)
            ds.labels[i] = static_cast<int>(c);
        else
            ds.labels[i] = classes.size() == 2 && c == *classes.rbegin() ? 1 : 0;
    }

    // Node labels: symbols are the ids as written, ordered numerically.
    std::set<long long> label_ids;
    for (std::size_t v = 0; v < nodes; ++v) {
        expect_columns(node_labels, v, 1);
        label_ids.insert(node_labels.rows[v][0]);
    }
    std::map<long long, Label> label_of;
    for (auto id : label_ids)
        label_of.emplace(id, ds.vocab.intern(std::to_string(id)));

    // Node -> (graph, local id).
    std::vector<std::size_t> graph_of(nodes);
    std::vector<NodeId> local(nodes);
    std::vector<std::vector<Label>> labels(graphs);
    for (std::size_t v = 0; v < nodes; ++v) {
        expect_columns(indicator, v, 1);
        const auto gid = indicator.rows[v][0];
        if (gid < 1 || static_cast<std::size_t>(gid) > graphs)
            throw ParseError(indicator.file, indicator.line_of[v],
                             "graph id " + std::to_string(gid) + " out of range 1.." + std::to_string(graphs));
        graph_of[v] = static_cast<std::size_t>(gid - 1);
        local[v] = static_cast<NodeId>(labels[graph_of[v]].size());
        labels[graph_of[v]].push_back(label_of.at(node_labels.rows[v][0]));
    }

    std::vector<std::set<Edge>> edges(graphs);
    for (std::size_t i = 0; i < A.rows.size(); ++i) {
        expect_columns(A, i, 2);
        const auto a = A.rows[i][0], b = A.rows[i][1];
        for (auto x : {a, b})
            if (x < 1 || static_cast<std::size_t>(x) > nodes)
                throw ParseError(A.file, A.line_of[i],
                                 "node id " + std::to_string(x) + " out of range 1.." + std::to_string(nodes));
        const auto u = static_cast<std::size_t>(a - 1), v = static_cast<std::size_t>(b - 1);
        if (graph_of[u] != graph_of[v])
            throw ParseError(A.file, A.line_of[i], "edge joins nodes of different graphs");
        if (u == v) {
            ++ds.dropped_self_loops;
            continue;
        }
        edges[graph_of[u]].insert(make_edge(local[u], local[v]));
    }

    ds.graphs.reserve(graphs);
    for (std::size_t g = 0; g < graphs; ++g) {
        if (labels[g].empty())
            throw ParseError(indicator.file, 0, "graph " + std::to_string(g + 1) + " has no nodes");
        ds.graphs.emplace_back(std::move(labels[g]), std::vector<Edge>(edges[g].begin(), edges[g].end()));
    }
    ds.vocab.set_frequencies(count_labels(ds.graphs, ds.vocab.size()));
    return ds;
}

void emit_dataset(const Dataset &ds, const fs::path &dir) {
    fs::create_directories(dir);
    auto open = [&](const char *suffix) {
        std::ofstream out(dir / (ds.name + suffix));
        if (!out)
            throw Error("cannot write " + (dir / (ds.name + suffix)).string());
        return out;
    };
    auto A = open("_A.txt");
    auto indicator = open("_graph_indicator.txt");
    auto graph_labels = open("_graph_labels.txt");
    auto node_labels = open("_node_labels.txt");
    // The format only holds integer label ids; other vocabularies are written by label index.
    const auto &symbols = ds.vocab.symbols();
    const bool numeric = std::all_of(symbols.begin(), symbols.end(), [](const std::string &s) {
        std::size_t pos = 0;
        try {
            std::stoll(s, &pos);
        } catch (const std::exception &) {
            return false;
        }
        return pos == s.size();
    });
    std::size_t base = 0;
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
        const auto &graph = ds.graphs[g];
        graph_labels << ds.labels[g] << '\n';
        for (NodeId v = 0; v < graph.node_count(); ++v) {
            indicator << g + 1 << '\n';
            if (numeric)
                node_labels << ds.vocab.symbol(graph.label(v)) << '\n';
            else
                node_labels << graph.label(v) << '\n';
        }
        // Both directions, as the common corpora do.
        for (auto [u, v] : graph.edges()) {
            A << base + u + 1 << ", " << base + v + 1 << '\n';
            A << base + v + 1 << ", " << base + u + 1 << '\n';
        }
        base += graph.node_count();
    }
}

Dataset filter_rare_labels(const Dataset &ds, std::size_t min_freq) {
    auto freq = ds.vocab.frequencies();
    if (freq.size() != ds.vocab.size())
        freq = count_labels(ds.graphs, ds.vocab.size());

    Dataset out;
    out.name = ds.name;
    out.dropped_self_loops = ds.dropped_self_loops;
    std::vector<char> keep(ds.size(), 1);
    std::vector<char> used(ds.vocab.size(), 0);
    for (std::size_t g = 0; g < ds.size(); ++g) {
        for (auto l : ds.graphs[g].labels())
            if (freq[l] < min_freq) {
                keep[g] = 0;
                break;
            }
        if (keep[g])
            for (auto l : ds.graphs[g].labels())
                used[l] = 1;
    }
    std::vector<Label> remap(ds.vocab.size(), 0);
    std::vector<std::size_t> kept_freq;
    for (Label l = 0; l < ds.vocab.size(); ++l)
        if (used[l]) {
            remap[l] = out.vocab.intern(ds.vocab.symbol(l));
            kept_freq.push_back(freq[l]);
        }
    out.vocab.set_frequencies(std::move(kept_freq));
    for (std::size_t g = 0; g < ds.size(); ++g) {
        if (!keep[g])
            continue;
        const auto &graph = ds.graphs[g];
        std::vector<Label> labels(graph.node_count());
        for (NodeId v = 0; v < graph.node_count(); ++v)
            labels[v] = remap[graph.label(v)];
        out.graphs.emplace_back(std::move(labels), std::vector<Edge>(graph.edges().begin(), graph.edges().end()));
        out.labels.push_back(ds.labels[g]);
    }
    return out;
}

InputSelection select_inputs(const Dataset &ds, Classifier &classifier) {
    InputSelection sel;
    std::vector<std::size_t> connected;
    std::vector<LabeledGraph> graphs;
    for (std::size_t g = 0; g < ds.size(); ++g) {
        if (!is_connected(ds.graphs[g])) {
            ++sel.disconnected;
            continue;
        }
        connected.push_back(g);
        graphs.push_back(ds.graphs[g]);
    }
    const auto verdicts = classifier.classify_batch(graphs);
    for (std::size_t i = 0; i < connected.size(); ++i)
        (verdicts[i].desired ? sel.others : sel.inputs).push_back(connected[i]);
    return sel;
}

Split stratified_split(const std::vector<int> &labels, std::uint64_t seed, double train, double validation) {
    if (!(train >= 0 && validation >= 0 && train + validation <= 1.0))
        throw ConfigError("split fractions must be non-negative and sum to at most 1");
    Rng rng(seed);
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(i);
    Split s;
    for (auto &[cls, idx] : by_class) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
        const auto n = idx.size();
        const auto n_train = static_cast<std::size_t>(static_cast<double>(n) * train);
        const auto n_val = static_cast<std::size_t>(static_cast<double>(n) * validation);
        s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.validation.insert(s.validation.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                            idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    }
    for (auto *v : {&s.train, &s.validation, &s.test})
        std::sort(v->begin(), v->end());
    return s;
}

} // namespace gcf
