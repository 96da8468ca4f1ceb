// Acceptance suite runner: one check per criterion, with a PASS/FAIL line
// each. The same suite backs the CLI's `selftest` subcommand.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <iostream>

#include "qpake/selftest.hpp"

TEST_CASE("acceptance criteria") {
  const auto results = qpake::run_acceptance_suite(&std::cout);
  REQUIRE(results.size() == 11);
  for (const auto& res : results) {
    CAPTURE(res.id);
    CAPTURE(res.name);
    CAPTURE(res.detail);
    CHECK(res.pass);
  }
}
