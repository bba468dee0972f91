// Text checkpoints for trained agents. The file is self-describing: a header
// with the architecture followed by every named parameter tensor, so loading
// rebuilds the agents without the original config.
#pragma once

#include <string>

#include "ibsignal/agents.hpp"

namespace ibsignal {

void save_checkpoint(const std::string& path, const Agents& agents);
Agents load_checkpoint(const std::string& path);

}  // namespace ibsignal
