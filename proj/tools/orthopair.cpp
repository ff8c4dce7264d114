#include "tools_commands.hpp"

int main(int argc, char** argv) { return ortho::cli::run(argc, argv); }
