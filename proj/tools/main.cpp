#include "cli.hpp"

int main(int argc, char** argv) { return hazrate::cli::run(argc, argv); }
