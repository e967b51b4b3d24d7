// Line-protocol classifier used by the tests.
//
//   echo_oracle [--prob P] [--reverse] [--fail-after N] [--garbage-after N] [--error-after N]
//
// Default verdict: probability 1 when the graph has a triangle, else 0.
// --reverse answers every chunk of requests that arrives together in reverse order.

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "gcf/wire.hpp"

int main(int argc, char **argv) {
    std::optional<double> fixed;
    bool reverse = false;
    long fail_after = -1, garbage_after = -1, error_after = -1;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&] { return i + 1 < argc ? std::string(argv[++i]) : std::string("0"); };
        if (a == "--prob")
            fixed = std::stod(next());
        else if (a == "--reverse")
            reverse = true;
        else if (a == "--fail-after")
            fail_after = std::stol(next());
        else if (a == "--garbage-after")
            garbage_after = std::stol(next());
        else if (a == "--error-after")
            error_after = std::stol(next());
        else {
            std::cerr << "echo_oracle: unknown argument " << a << '\n';
            return 2;
        }
    }

    gcf::LabelVocabulary vocab;
    std::string buffer;
    long served = 0;
    char chunk[65536];
    for (;;) {
        ssize_t got = ::read(0, chunk, sizeof chunk);
        if (got <= 0)
            return 0;
        buffer.append(chunk, static_cast<std::size_t>(got));
        std::vector<std::string> lines;
        for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n')) {
            lines.push_back(buffer.substr(0, nl));
            buffer.erase(0, nl + 1);
        }
        if (reverse)
            std::reverse(lines.begin(), lines.end());
        std::string out;
        for (const auto &line : lines) {
            if (served == fail_after)
                return 3;
            if (served == garbage_after) {
                out += "this is not a response\n";
                ++served;
                continue;
            }
            gcf::wire::Response resp;
            try {
                auto req = gcf::wire::decode_request(line);
                resp.id = req.id;
                if (served == error_after)
                    resp.error = "refused";
                else if (fixed)
                    resp.prob = *fixed;
                else
                    resp.prob = gcf::has_triangle(gcf::wire::request_graph(req, vocab)) ? 1.0 : 0.0;
            } catch (const std::exception &e) {
                resp.error = e.what();
            }
            out += gcf::wire::encode(resp) + "\n";
            ++served;
        }
        for (std::size_t off = 0; off < out.size();) {
            ssize_t put = ::write(1, out.data() + off, out.size() - off);
            if (put <= 0)
                return 1;
            off += static_cast<std::size_t>(put);
        }
    }
}
