#include "navvlm/cli.hpp"

int main(int argc, char** argv) { return navvlm::cli::main(argc, argv); }
