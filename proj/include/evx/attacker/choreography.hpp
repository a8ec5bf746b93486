#pragma once

#include <vector>

#include "evx/attacker/script.hpp"
#include "evx/harness/world.hpp"

namespace evx::attacker {

/// Plays the attack script against a cross-relay world, alongside the
/// victim's own plan, and runs the world to completion.
///
/// Throws ChoreographyViolation if the world is not wired for cross relaying
/// or an action's precondition does not hold when it comes due. If the
/// victim's session fails before charging (the guard caught the relay), the
/// remaining actions are dropped and the attacker leaves.
std::vector<harness::TraceEntry> run_evexchange(const AttackScript& script, harness::World& world);

}  // namespace evx::attacker
