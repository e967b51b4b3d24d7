#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gcf {

/// Base for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
public:
    using Error::Error;
};

class InvalidEdit : public Error {
public:
    using Error::Error;
};

/// Malformed dataset or report file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string &what)
        : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string &file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Malformed line on the classifier wire protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// External classifier unreachable or failed. Carries the key of the graph being classified.
class TransportError : public Error {
public:
    TransportError(const std::string &what, std::string graph_key = {})
        : Error(graph_key.empty() ? what : what + " [graph " + graph_key + "]"),
          graph_key_(std::move(graph_key)) {}

    const std::string &graph_key() const noexcept { return graph_key_; }

private:
    std::string graph_key_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace gcf
