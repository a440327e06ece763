#pragma once

#include <iosfwd>

namespace ctstokes {

// Runs the oracle suite (dense solves, finite differences, time quadrature,
// counting identities) against the library on small meshes, printing one
// PASS/FAIL line per check.  Returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace ctstokes
