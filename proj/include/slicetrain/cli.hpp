#pragma once

// Headless command-line harness over the whole core.

#include <ostream>
#include <string>
#include <vector>

namespace slicetrain {

struct CommandResult {
    int exit_code = 0;  // 0 success, 1 domain error, 2 usage error
    std::vector<std::string> artifacts;  // written file paths
    std::string summary;
};

// args excludes the program name. Reports go to `out`; diagnostics (usage
// text, "<ErrorName>: detail") go to `err`.
CommandResult run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slicetrain
