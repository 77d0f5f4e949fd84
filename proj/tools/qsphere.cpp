#include "qsphere/cli.hpp"

int main(int argc, char** argv) { return qsphere::runCommand(argc, argv); }
