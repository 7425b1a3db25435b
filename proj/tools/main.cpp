#include "cli.hpp"

int main(int argc, char** argv) { return nvcav::run_cli(argc, argv); }
