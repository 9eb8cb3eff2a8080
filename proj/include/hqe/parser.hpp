#pragma once

#include <string>

#include "hqe/ast.hpp"

namespace hqe {

// Two distinct failure channels: plain syntax errors, and constructs
// that are valid SQL but outside the supported subset.  Downstream
// clause-correction cares about the difference.
struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(std::string msg, size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

struct UnsupportedFeature : std::runtime_error {
    std::string feature;
    size_t offset;
    UnsupportedFeature(std::string feat, size_t off)
        : std::runtime_error("unsupported construct: " + feat + " (offset " +
                             std::to_string(off) + ")"),
          feature(std::move(feat)),
          offset(off) {}
};

// Supported subset: SELECT [exprs|*] FROM items (comma, JOIN..ON,
// LEFT [OUTER] JOIN..ON, derived tables), WHERE with AND/OR over
// comparisons, LIKE, IN (list|subquery), IS NULL, BETWEEN (desugared),
// GROUP BY, ORDER BY, LIMIT, and UNION ALL between blocks.
Query parse_sql(const std::string& text);

}  // namespace hqe
