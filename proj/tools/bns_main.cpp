#include "bns/cli.hpp"

int main(int argc, char** argv) { return bns::cli_main(argc, argv); }
