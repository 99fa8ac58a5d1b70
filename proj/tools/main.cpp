#include "cli.hpp"

int main(int argc, char** argv) { return tpe::cli::run(argc, argv); }
