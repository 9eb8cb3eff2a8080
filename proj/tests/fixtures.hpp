#pragma once

#include <string>

#include "hqe/database.hpp"

namespace hqe::testing {

// Eight-table decision-support schema used across the test suite.
SchemaCatalog mini_catalog();

// Row builders by (table, named cells); unspecified columns get bland
// in-domain defaults.
class DataBuilder {
  public:
    explicit DataBuilder(DatabaseState& db) : db_(db) {}
    DataBuilder& row(const std::string& table,
                     const std::vector<std::pair<std::string, Value>>& cells);

  private:
    DatabaseState& db_;
};

// Worked-example fixtures.
DatabaseState lowbal_instance();          // eight customers, a few orders
std::string lowbal_text();                // two-table join with an account-balance cap

DatabaseState union_loj_instance();        // hosts the two-branch union query
std::string union_loj_hidden_text();       // LEFT JOIN branch + membership branch, outer GROUP BY
std::string union_loj_inner_variant_text();  // first branch as a plain inner join
std::string union_loj_final_text();        // the nested two-branch target form
std::string union_loj_final_alt_text();    // same query, different aliases/ordering

DatabaseState sve_single_row_instance();     // exact single-row state for the s-value example
std::string membership_branch_text();           // the membership branch as a standalone hidden query

}  // namespace hqe::testing
