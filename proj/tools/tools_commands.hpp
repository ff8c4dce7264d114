#ifndef ORTHO_TOOLS_COMMANDS_HPP
#define ORTHO_TOOLS_COMMANDS_HPP

namespace ortho::cli {

// Parses argv and dispatches to a subcommand. Exit codes: 0 success,
// 1 usage error, 2 data error, 3 numeric/training failure.
int run(int argc, char** argv);

} // namespace ortho::cli

#endif
