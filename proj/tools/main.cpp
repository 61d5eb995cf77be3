#include "nambugeo/cli.hpp"

int main(int argc, char** argv) { return nambugeo::run_cli(argc, argv); }
