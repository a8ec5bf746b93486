#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evx::attacker {

enum class ActionKind {
    PlugAttackerEv,
    WaitForVictimSession,
    SendStopToVictimEvse,
    SetDischargeSchedule,
    SetOverchargeSchedule,
    Unplug,
};

/// One step of the choreography. Each action starts `delay` seconds after the
/// previous one completed; wait_for_victim_session completes when the victim's
/// session is charging, and its delay is how long the victim lingers before
/// walking away.
struct AttackAction {
    ActionKind kind = ActionKind::PlugAttackerEv;
    double delay = 0.0;
    /// Target energy in kWh for the schedule actions (magnitude).
    double energy_kwh = 0.0;

    bool operator==(const AttackAction&) const = default;
};

struct AttackScript {
    std::vector<AttackAction> actions;

    /// plug the attacker's EV, wait for the victim to leave, stop the victim's
    /// column through the attacker's own session.
    static AttackScript standard();

    bool operator==(const AttackScript&) const = default;
};

class ChoreographyViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_string(ActionKind k);
/// Throws std::invalid_argument for unknown names.
ActionKind action_from_string(const std::string& s);

/// Static ordering checks; throws ChoreographyViolation.
void validate(const AttackScript& script);

}  // namespace evx::attacker
