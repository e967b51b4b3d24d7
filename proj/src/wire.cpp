#include "gcf/wire.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <unordered_map>

#include <fcntl.h>
#include <netdb.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "gcf/errors.hpp"

extern char **environ;

namespace gcf::wire {

using nlohmann::json;

Request make_request(std::uint64_t id, const LabeledGraph &g, const LabelVocabulary &vocab) {
    Request r;
    r.id = id;
    r.nodes.reserve(g.node_count());
    for (auto l : g.labels())
        r.nodes.push_back(vocab.symbol(l));
    for (auto [u, v] : g.edges())
        r.edges.push_back({u, v});
    return r;
}

LabeledGraph request_graph(const Request &req, LabelVocabulary &vocab) {
    std::vector<Label> labels;
    labels.reserve(req.nodes.size());
    for (const auto &s : req.nodes)
        labels.push_back(vocab.intern(s));
    std::vector<Edge> edges;
    for (auto e : req.edges)
        edges.emplace_back(e[0], e[1]);
    return LabeledGraph(std::move(labels), std::move(edges));
}

std::string encode(const Request &req) {
    nlohmann::ordered_json j;
    j["v"] = kVersion;
    j["id"] = req.id;
    j["nodes"] = req.nodes;
    auto edges = json::array();
    for (auto e : req.edges)
        edges.push_back({e[0], e[1]});
    j["edges"] = std::move(edges);
    return j.dump();
}

std::string encode(const Response &resp) {
    nlohmann::ordered_json j;
    j["v"] = kVersion;
    j["id"] = resp.id;
    if (resp.prob)
        j["prob"] = *resp.prob;
    else
        j["error"] = resp.error;
    return j.dump();
}

namespace {

json parse_line(const std::string &line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error &e) {
        throw ProtocolError(std::string("malformed line: ") + e.what());
    }
    if (!j.is_object())
        throw ProtocolError("protocol line is not an object");
    auto v = j.find("v");
    if (v == j.end() || !v->is_number_integer() || v->get<int>() != kVersion)
        throw ProtocolError("missing or unsupported protocol version");
    auto id = j.find("id");
    if (id == j.end() || !id->is_number_unsigned())
        throw ProtocolError("missing or invalid id");
    return j;
}

} // namespace

Request decode_request(const std::string &line) {
    auto j = parse_line(line);
    Request r;
    r.id = j["id"].get<std::uint64_t>();
    auto nodes = j.find("nodes");
    auto edges = j.find("edges");
    if (nodes == j.end() || !nodes->is_array() || edges == j.end() || !edges->is_array())
        throw ProtocolError("request needs nodes and edges arrays");
    for (const auto &n : *nodes) {
        if (!n.is_string())
            throw ProtocolError("node labels must be strings");
        r.nodes.push_back(n.get<std::string>());
    }
    for (const auto &e : *edges) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
            throw ProtocolError("edges must be [u,v] pairs of node indices");
        r.edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>()});
    }
    return r;
}

Response decode_response(const std::string &line) {
    auto j = parse_line(line);
    Response r;
    r.id = j["id"].get<std::uint64_t>();
    if (auto p = j.find("prob"); p != j.end()) {
        if (!p->is_number())
            throw ProtocolError("prob must be a number");
        const double v = p->get<double>();
        if (!(v >= 0.0 && v <= 1.0))
            throw ProtocolError("prob outside [0,1]");
        r.prob = v;
    } else if (auto e = j.find("error"); e != j.end() && e->is_string()) {
        r.error = e->get<std::string>();
        if (r.error.empty())
            r.error = "unspecified error";
    } else {
        throw ProtocolError("response needs prob or error");
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

class FdLineReader {
public:
    explicit FdLineReader(int fd) : fd_(fd) {}

    std::optional<std::string> read_line() {
        for (;;) {
            auto nl = buffer_.find('\n', scanned_);
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                scanned_ = 0;
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                return line;
            }
            scanned_ = buffer_.size();
            char chunk[4096];
            ssize_t got = ::read(fd_, chunk, sizeof chunk);
            if (got < 0 && errno == EINTR)
                continue;
            if (got < 0)
                throw TransportError(std::string("read failed: ") + std::strerror(errno));
            if (got == 0) {
                if (buffer_.empty())
                    return std::nullopt;
                std::string line;
                line.swap(buffer_);
                scanned_ = 0;
                return line;
            }
            buffer_.append(chunk, static_cast<std::size_t>(got));
        }
    }

private:
    int fd_;
    std::string buffer_;
    std::size_t scanned_ = 0;
};

void write_all(int fd, const std::string &data) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t put = ::write(fd, data.data() + off, data.size() - off);
        if (put < 0 && errno == EINTR)
            continue;
        if (put < 0)
            throw TransportError(std::string("write failed: ") + std::strerror(errno));
        off += static_cast<std::size_t>(put);
    }
}

class ProcessChannel final : public LineChannel {
public:
    explicit ProcessChannel(std::string command) : command_(std::move(command)) {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2], from_child[2];
        if (::pipe(to_child) != 0)
            throw TransportError("pipe failed");
        if (::pipe(from_child) != 0) {
            ::close(to_child[0]);
            ::close(to_child[1]);
            throw TransportError("pipe failed");
        }
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
        posix_spawn_file_actions_addclose(&actions, to_child[1]);
        posix_spawn_file_actions_addclose(&actions, from_child[0]);
        const char *argv[] = {"/bin/sh", "-c", command_.c_str(), nullptr};
        int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, const_cast<char **>(argv), environ);
        posix_spawn_file_actions_destroy(&actions);
        ::close(to_child[0]);
        ::close(from_child[1]);
        if (rc != 0) {
            ::close(to_child[1]);
            ::close(from_child[0]);
            throw TransportError("cannot spawn '" + command_ + "'");
        }
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        reader_ = std::make_unique<FdLineReader>(read_fd_);
    }

    ~ProcessChannel() override {
        ::close(write_fd_);
        ::close(read_fd_);
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }

    void write_line(const std::string &line) override { write_all(write_fd_, line + "\n"); }
    std::optional<std::string> read_line() override { return reader_->read_line(); }
    std::string describe() const override { return "exec:" + command_; }

private:
    std::string command_;
    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
    std::unique_ptr<FdLineReader> reader_;
};

class TcpChannel final : public LineChannel {
public:
    TcpChannel(std::string host, std::uint16_t port) : host_(std::move(host)), port_(port) {
        std::signal(SIGPIPE, SIG_IGN);
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo *res = nullptr;
        const auto service = std::to_string(port_);
        if (::getaddrinfo(host_.c_str(), service.c_str(), &hints, &res) != 0)
            throw TransportError("cannot resolve " + host_);
        for (auto *p = res; p; p = p->ai_next) {
            int fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
            if (fd < 0)
                continue;
            if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
                fd_ = fd;
                break;
            }
            ::close(fd);
        }
        ::freeaddrinfo(res);
        if (fd_ < 0)
            throw TransportError("cannot connect to " + host_ + ":" + service);
        reader_ = std::make_unique<FdLineReader>(fd_);
    }

    ~TcpChannel() override { ::close(fd_); }

    void write_line(const std::string &line) override { write_all(fd_, line + "\n"); }
    std::optional<std::string> read_line() override { return reader_->read_line(); }
    std::string describe() const override { return "tcp:" + host_ + ":" + std::to_string(port_); }

private:
    std::string host_;
    std::uint16_t port_;
    int fd_ = -1;
    std::unique_ptr<FdLineReader> reader_;
};

} // namespace

std::unique_ptr<LineChannel> spawn_process(const std::string &command) {
    return std::make_unique<ProcessChannel>(command);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string &host, std::uint16_t port) {
    return std::make_unique<TcpChannel>(host, port);
}

// ---------------------------------------------------------------------------

ExternalModel::ExternalModel(std::unique_ptr<LineChannel> channel, LabelVocabulary vocab, std::size_t window)
    : channel_(std::move(channel)), vocab_(std::move(vocab)), window_(window ? window : 1) {}

double ExternalModel::predict(const LabeledGraph &g) {
    return predict_batch(std::span<const LabeledGraph>(&g, 1)).front();
}

std::vector<double> ExternalModel::predict_batch(std::span<const LabeledGraph> graphs) {
    std::vector<double> out(graphs.size());
    // Requests go out in windows so neither side's pipe buffer can fill up.
    for (std::size_t start = 0; start < graphs.size(); start += window_) {
        const std::size_t end = std::min(graphs.size(), start + window_);
        std::unordered_map<std::uint64_t, std::size_t> waiting;
        // Failures name the earliest graph still unanswered.
        auto pending_key = [&] {
            std::size_t first = end;
            for (const auto &[id, i] : waiting)
                first = std::min(first, i);
            return first < end ? canonical_key(graphs[first]).hex() : std::string();
        };
        try {
            for (std::size_t i = start; i < end; ++i) {
                const auto id = next_id_++;
                waiting.emplace(id, i);
                channel_->write_line(encode(make_request(id, graphs[i], vocab_)));
            }
        } catch (const TransportError &e) {
            throw TransportError(e.what(), pending_key());
        }
        while (!waiting.empty()) {
            std::optional<std::string> line;
            try {
                line = channel_->read_line();
            } catch (const TransportError &e) {
                throw TransportError(e.what(), pending_key());
            }
            if (!line)
                throw TransportError("classifier closed the connection (" + channel_->describe() + ")",
                                     pending_key());
            auto resp = decode_response(*line);
            auto it = waiting.find(resp.id);
            if (it == waiting.end())
                throw ProtocolError("response for unknown id " + std::to_string(resp.id));
            if (!resp.prob)
                throw TransportError("classifier error: " + resp.error, canonical_key(graphs[it->second]).hex());
            out[it->second] = *resp.prob;
            waiting.erase(it);
        }
    }
    return out;
}

} // namespace gcf::wire
