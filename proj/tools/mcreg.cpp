#include <mcreg/cli.hpp>

int main(int argc, char** argv) { return mcreg::run_cli(argc, argv); }
