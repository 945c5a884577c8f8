#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include "dbarlab.h"

TEST_CASE("version and selftest surface exist") {
  CHECK(dbar_version() != nullptr);
}
