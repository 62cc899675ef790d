#include "gibbsym/cli.hpp"

int main(int argc, char** argv) { return gibbsym::run_cli(argc, argv); }
