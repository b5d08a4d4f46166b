#include "cli.hpp"

int main(int argc, char** argv) { return jive::cli::run(argc, argv); }
