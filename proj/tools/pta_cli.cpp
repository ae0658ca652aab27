#include "pta/harness.hpp"

int main(int argc, char** argv) { return pta::run_cli(argc, argv); }
