#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slowfast::selfcheck {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs the library's invariant suite (log-norm oracle consistency, envelope
// case continuity, gain-lemma soundness, diagram implications, certificate
// fits, shifted-system consistency, integrator order). Deterministic for a
// fixed seed.
std::vector<CheckResult> run_all(std::uint64_t seed);

}  // namespace slowfast::selfcheck
