#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <thread>

#include "gcf/errors.hpp"
#include "gcf/wire.hpp"
#include "oracles.hpp"

using namespace gcf;

namespace {

const std::string echo = GCF_ECHO_ORACLE;

LabelVocabulary two_labels() { return LabelVocabulary({"C", "O"}); }

std::vector<LabeledGraph> mixed_graphs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledGraph> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(oracle::random_connected(rng, 2 + uniform_index(rng, 7), 2, uniform_index(rng, 4)));
    return out;
}

/// One-connection TCP classifier on 127.0.0.1 answering each received chunk in reverse.
class TcpServer {
public:
    TcpServer() {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        REQUIRE(::bind(listen_fd_, reinterpret_cast<sockaddr *>(&addr), sizeof addr) == 0);
        REQUIRE(::listen(listen_fd_, 1) == 0);
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        thread_ = std::thread([this] { serve(); });
    }
    ~TcpServer() {
        thread_.join();
        ::close(listen_fd_);
    }
    std::uint16_t port() const { return port_; }
    long served() const { return served_; }

private:
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread thread_;
    std::atomic<long> served_{0};

    void serve() {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0)
            return;
        LabelVocabulary vocab;
        std::string buffer;
        char chunk[65536];
        for (;;) {
            ssize_t got = ::read(fd, chunk, sizeof chunk);
            if (got <= 0)
                break;
            buffer.append(chunk, static_cast<std::size_t>(got));
            std::vector<std::string> lines;
            for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n')) {
                lines.push_back(buffer.substr(0, nl));
                buffer.erase(0, nl + 1);
            }
            std::string out;
            for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
                auto req = wire::decode_request(*it);
                wire::Response r{req.id, has_triangle(wire::request_graph(req, vocab)) ? 1.0 : 0.0, {}};
                out += wire::encode(r) + "\n";
                ++served_;
            }
            if (::write(fd, out.data(), out.size()) != static_cast<ssize_t>(out.size()))
                break;
        }
        ::close(fd);
    }
};

} // namespace

TEST_CASE("request and response encoding round-trips") {
    auto vocab = two_labels();
    LabeledGraph g({0, 1, 0}, {{0, 1}, {1, 2}});
    auto req = wire::make_request(42, g, vocab);
    auto line = wire::encode(req);
    CHECK(line == R"({"v":1,"id":42,"nodes":["C","O","C"],"edges":[[0,1],[1,2]]})");
    auto back = wire::decode_request(line);
    CHECK(back == req);
    LabelVocabulary fresh;
    CHECK(wire::request_graph(back, fresh) == g);

    wire::Response ok{7, 0.25, {}};
    CHECK(wire::decode_response(wire::encode(ok)) == ok);
    wire::Response bad{8, std::nullopt, "boom"};
    CHECK(wire::decode_response(wire::encode(bad)) == bad);
}

TEST_CASE("graphs survive the wire bit for bit") {
    auto vocab = two_labels();
    for (const auto &g : mixed_graphs(100, 3)) {
        LabelVocabulary fresh = vocab;
        CHECK(wire::request_graph(wire::decode_request(wire::encode(wire::make_request(1, g, vocab))), fresh) == g);
    }
}

TEST_CASE("malformed lines are protocol errors") {
    for (const char *line : {"", "not json", "[]", R"({"id":1,"prob":0.5})", R"({"v":2,"id":1,"prob":0.5})",
                             R"({"v":1,"prob":0.5})", R"({"v":1,"id":-1,"prob":0.5})", R"({"v":1,"id":1})",
                             R"({"v":1,"id":1,"prob":1.5})", R"({"v":1,"id":1,"prob":"x"})"})
        CHECK_THROWS_AS(wire::decode_response(line), ProtocolError);
    for (const char *line : {R"({"v":1,"id":1,"nodes":["C"]})", R"({"v":1,"id":1,"nodes":[1],"edges":[]})",
                             R"({"v":1,"id":1,"nodes":["C"],"edges":[[0]]})"})
        CHECK_THROWS_AS(wire::decode_request(line), ProtocolError);
}

TEST_CASE("spawned classifier matches the in-process motif") {
    auto graphs = mixed_graphs(300, 5);
    wire::ExternalModel remote(wire::spawn_process(echo + " --reverse"), two_labels(), 16);
    auto local = MotifModel::contains_triangle();
    auto probs = remote.predict_batch(graphs);
    REQUIRE(probs.size() == graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i)
        CHECK(probs[i] == local->predict(graphs[i]));
    CHECK(remote.predict(oracle::cycle(3)) == 1.0);
    CHECK(remote.predict_batch({}).empty());

    Classifier clf(std::make_shared<wire::ExternalModel>(wire::spawn_process(echo), two_labels()));
    Classifier ref(MotifModel::contains_triangle());
    auto verdicts = clf.classify_batch(graphs);
    for (std::size_t i = 0; i < graphs.size(); ++i)
        CHECK(verdicts[i] == ref.classify(graphs[i]));
}

TEST_CASE("constant echo answers every request") {
    wire::ExternalModel remote(wire::spawn_process(echo + " --prob 0.5"), two_labels());
    for (double p : remote.predict_batch(mixed_graphs(50, 7)))
        CHECK(p == 0.5);
}

TEST_CASE("classifier failures surface as errors naming the graph") {
    auto graphs = mixed_graphs(10, 9);
    {
        wire::ExternalModel remote(wire::spawn_process(echo + " --fail-after 3"), two_labels(), 1);
        try {
            remote.predict_batch(graphs);
            FAIL("expected a transport error");
        } catch (const TransportError &e) {
            CHECK(e.graph_key() == canonical_key(graphs[3]).hex());
        }
    }
    {
        wire::ExternalModel remote(wire::spawn_process(echo + " --error-after 2"), two_labels(), 1);
        try {
            remote.predict_batch(graphs);
            FAIL("expected a transport error");
        } catch (const TransportError &e) {
            CHECK(e.graph_key() == canonical_key(graphs[2]).hex());
        }
    }
    {
        wire::ExternalModel remote(wire::spawn_process(echo + " --garbage-after 0"), two_labels());
        CHECK_THROWS_AS(remote.predict(graphs[0]), ProtocolError);
    }
    {
        wire::ExternalModel remote(wire::spawn_process("exit 0"), two_labels());
        CHECK_THROWS_AS(remote.predict(graphs[0]), TransportError);
    }
    CHECK_THROWS_AS(wire::connect_tcp("127.0.0.1", 1), TransportError);
}

TEST_CASE("tcp classifier with out-of-order answers") {
    TcpServer server;
    auto graphs = mixed_graphs(200, 11);
    {
        wire::ExternalModel remote(wire::connect_tcp("127.0.0.1", server.port()), two_labels(), 32);
        auto local = MotifModel::contains_triangle();
        auto probs = remote.predict_batch(graphs);
        for (std::size_t i = 0; i < graphs.size(); ++i)
            CHECK(probs[i] == local->predict(graphs[i]));
        // ten thousand single round trips keep ids matched
        std::size_t mismatches = 0;
        for (int r = 0; r < 10000; ++r) {
            const auto &g = graphs[static_cast<std::size_t>(r) % graphs.size()];
            mismatches += remote.predict(g) != local->predict(g);
        }
        CHECK(mismatches == 0);
    }
    CHECK(server.served() == 10200);
}
