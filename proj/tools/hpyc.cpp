#include "hpyc/cli.hpp"

int main(int argc, char** argv) { return hpyc::run(argc, argv); }
