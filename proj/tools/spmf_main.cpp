#include "spmf_cli.hpp"

int main(int argc, char** argv) { return spmf::cli::run_cli(argc, argv); }
