#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mrir {

// Error hierarchy. Everything user-visible derives from mrir::error so the
// CLI can map failures to one exit code.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_image_error : error {
    using error::error;
};
struct dimension_error : error {
    using error::error;
};
struct layout_error : error {
    using error::error;
};
struct format_error : error {
    format_error(const std::string& msg, std::uint64_t byte_offset)
        : error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::uint64_t offset;
};
struct config_error : error {
    using error::error;
};
struct io_error : error {
    using error::error;
};

}  // namespace mrir
