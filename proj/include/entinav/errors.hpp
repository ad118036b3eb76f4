#ifndef ENTINAV_ERRORS_HPP
#define ENTINAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace entinav {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad argument values: non-finite numbers, out-of-range scalars, degenerate shapes.
struct input_error : error {
    using error::error;
};

/// Lookup of an agent/node id that does not exist.
struct not_found_error : error {
    using error::error;
};

/// A parameter left its documented bound. Carries the offending field path.
struct bound_violation_error : error {
    std::string field;
    bound_violation_error(std::string field_path, const std::string& what)
        : error(what), field(std::move(field_path)) {}
};

/// Unusable configuration: singular mapping matrix, degenerate extreme vectors.
struct config_error : error {
    using error::error;
};

/// Missing or insufficient data: incomplete study pairs, short fit windows,
/// zero-variance statistics items.
struct data_error : error {
    using error::error;
};

/// Malformed input text. Line is 1-based; 0 when unknown.
struct parse_error : error {
    int line = 0;
    parse_error(const std::string& what, int line_no = 0)
        : error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what),
          line(line_no) {}
};

/// Semantically invalid scenario or override.
struct validation_error : error {
    using error::error;
};

/// Global planning failure (unreachable goal).
struct plan_error : error {
    using error::error;
};

/// Unusable world geometry (e.g. no free roadmap nodes).
struct world_error : error {
    using error::error;
};

} // namespace entinav

#endif
