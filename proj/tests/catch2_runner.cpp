// Builds the amalgamated Catch2 v3 distribution (including its default main)
// into one static library shared by every test binary.
#include <catch2/catch_amalgamated.cpp>
