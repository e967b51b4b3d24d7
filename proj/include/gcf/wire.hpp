#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcf/classifier.hpp"
#include "gcf/graph.hpp"

/**
 * Line protocol for external classifiers (version 1).
 *
 * Each request and response is one line of compact JSON:
 *
 *   request:  {"v":1,"id":<uint>,"nodes":["<label>",...],"edges":[[u,v],...]}
 *   response: {"v":1,"id":<uint>,"prob":<float in [0,1]>}
 *             {"v":1,"id":<uint>,"error":"<message>"}
 *
 * `prob` is the model's probability of class 1. Ids are echoed; responses may
 * arrive out of order. Any line that does not parse as above is a protocol error.
 */
namespace gcf::wire {

inline constexpr int kVersion = 1;

struct Request {
    std::uint64_t id = 0;
    std::vector<std::string> nodes;
    std::vector<std::array<NodeId, 2>> edges;

    friend bool operator==(const Request &, const Request &) = default;
};

struct Response {
    std::uint64_t id = 0;
    std::optional<double> prob;
    std::string error;

    friend bool operator==(const Response &, const Response &) = default;
};

Request make_request(std::uint64_t id, const LabeledGraph &g, const LabelVocabulary &vocab);
/// Rebuilds the graph, interning unknown symbols into `vocab`.
LabeledGraph request_graph(const Request &req, LabelVocabulary &vocab);

std::string encode(const Request &req);
std::string encode(const Response &resp);
Request decode_request(const std::string &line);
Response decode_response(const std::string &line);

/// Bidirectional line transport.
class LineChannel {
public:
    virtual ~LineChannel() = default;
    virtual void write_line(const std::string &line) = 0;
    /// Returns nullopt on end of stream.
    virtual std::optional<std::string> read_line() = 0;
    virtual std::string describe() const = 0;
};

/// Spawns `command` through /bin/sh and talks over its stdin/stdout.
std::unique_ptr<LineChannel> spawn_process(const std::string &command);
/// Connects to host:port.
std::unique_ptr<LineChannel> connect_tcp(const std::string &host, std::uint16_t port);

/// GraphModel backed by a remote classifier speaking the line protocol.
class ExternalModel final : public GraphModel {
public:
    ExternalModel(std::unique_ptr<LineChannel> channel, LabelVocabulary vocab, std::size_t window = 64);

    double predict(const LabeledGraph &g) override;
    std::vector<double> predict_batch(std::span<const LabeledGraph> graphs) override;
    bool concurrent() const override { return false; }
    bool cacheable() const override { return true; }
    std::string describe() const override { return "external:" + channel_->describe(); }

private:
    std::unique_ptr<LineChannel> channel_;
    LabelVocabulary vocab_;
    std::size_t window_;
    std::uint64_t next_id_ = 1;
};

} // namespace gcf::wire
