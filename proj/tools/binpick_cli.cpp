#include "binpick/harness.hpp"

int main(int argc, char** argv) { return binpick::cli_main(argc, argv); }
