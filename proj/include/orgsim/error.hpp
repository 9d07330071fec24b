#pragma once

#include <stdexcept>
#include <string>

namespace orgsim {

// Domain error carrying a stable, machine-readable code such as
// "no-such-node" or "causality". The message is for humans.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail);

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace orgsim
