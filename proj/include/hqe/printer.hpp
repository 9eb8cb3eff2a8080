#pragma once

#include <string>

#include "hqe/ast.hpp"
#include "hqe/schema.hpp"

namespace hqe {

// Deterministic pretty text; parse(render_sql(q)) reproduces q.
std::string render_sql(const Query& q);
std::string render_expr(const Expr& e);
std::string render_pred(const Pred& p);

// Canonical form: inner JOIN..ON folded into WHERE, pure inner FROM
// items sorted, aliases renumbered positionally, conjuncts and IN lists
// sorted, column-column atoms oriented, UNION branches sorted.  The
// catalog (when given) lets unqualified columns resolve and * expand.
Query canonicalize(const Query& q, const SchemaCatalog* catalog = nullptr);

std::string canonical_sql(const Query& q, const SchemaCatalog* catalog = nullptr);
// Hex SHA-256 of the canonical text; the session journal keys synthesis
// candidates by this ("no new formulation" detection).
std::string canonical_digest(const Query& q, const SchemaCatalog* catalog = nullptr);

bool structurally_equal(const Query& a, const Query& b, const SchemaCatalog* catalog = nullptr);

}  // namespace hqe
