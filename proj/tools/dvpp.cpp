#include "dvpp/cli.hpp"

int main(int argc, char** argv) { return dvpp::cli_main(argc, argv); }
