#pragma once

#include "hqe/ast.hpp"
#include "hqe/database.hpp"
#include "hqe/resultset.hpp"

namespace hqe {

// Thrown when a referenced table fails to resolve against the current
// state (renamed away or absent).  This is the error-probing signal, so
// it gets its own type rather than folding into EngineFault.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Multiset-semantics evaluation of the supported subset: UNION ALL
// concatenates, LEFT JOIN pads unmatched left rows with NULLs, IN
// (subquery) is existential under three-valued logic, ORDER BY applies
// per block.  Subqueries may reference the enclosing block's columns.
ResultSet execute(const Query& q, const DatabaseState& db);

}  // namespace hqe
