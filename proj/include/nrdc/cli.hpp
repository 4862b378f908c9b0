#pragma once

#include <string>
#include <vector>

namespace nrdc {
namespace cli {

// 0 = success, 1 = pipeline error (stage-tagged on stderr), 2 = usage error.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, char** argv);

}  // namespace cli
}  // namespace nrdc
