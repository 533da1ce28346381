#include "igl/cli.hpp"

int main(int argc, char** argv) { return igl::run_cli(argc, argv); }
