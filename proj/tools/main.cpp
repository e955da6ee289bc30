#include "fledge/cli/commands.hpp"

int main(int argc, char** argv) { return fledge::cli::run(argc, argv); }
