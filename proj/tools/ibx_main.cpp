#include "ib/cli.hpp"

int main(int argc, char** argv) { return ib::cli::run(argc, argv); }
