#include "commands.hpp"

int main(int argc, char** argv) { return mdpode::cli::run(argc, argv); }
