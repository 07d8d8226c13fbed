#include "rtt/error.hpp"

namespace rtt {

ParseError::ParseError(std::size_t line, const std::string& what)
    : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace rtt
