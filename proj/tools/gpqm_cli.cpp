#include "gpqm/cli.hpp"

int main(int argc, char** argv) { return gpqm::cli::run(argc, argv); }
