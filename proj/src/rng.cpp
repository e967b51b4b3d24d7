#include "gcf/rng.hpp"

#include <sstream>

#include "gcf/errors.hpp"

namespace gcf {

std::string serialize_rng(const Rng &rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

Rng deserialize_rng(const std::string &text) {
    Rng rng;
    std::istringstream in(text);
    in >> rng;
    if (!in)
        throw ParseError("checkpoint", 0, "bad rng state");
    return rng;
}

} // namespace gcf
