#pragma once

#include <functional>
#include <string>
#include <vector>

#include "params.hpp"

namespace ocp::cli {

struct Command {
  std::string name;
  std::string help;
  std::function<void(ParamSet&)> declare;
  /// Returns the text to write to --out.
  std::function<std::string(ParamSet&)> run;
};

const std::vector<Command>& commands();

}  // namespace ocp::cli
