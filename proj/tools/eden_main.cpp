#include "eden_cli.hpp"

int main(int argc, char** argv) { return eden::cli::run_cli(argc, argv); }
