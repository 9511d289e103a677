#include <catch2/catch_amalgamated.hpp>

#include "deconflict/deconflict.hpp"

TEST_CASE("placeholder test_generators") { SUCCEED(); }
