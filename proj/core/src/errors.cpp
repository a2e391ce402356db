#include "auraseg/errors.hpp"

namespace auraseg {

FormatError::FormatError(const std::string& message, int line)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace auraseg
