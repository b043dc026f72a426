#include "eigenmax/cli.hpp"

int main(int argc, char** argv) { return eigenmax::run_cli(argc, argv); }
