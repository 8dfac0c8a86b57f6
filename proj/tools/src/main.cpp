#include "commands.hpp"

int main(int argc, char** argv) { return rydcz::cli::main_entry(argc, argv); }
