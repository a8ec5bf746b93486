#include "evx/attacker/script.hpp"

#include <array>

namespace evx::attacker {

namespace {

constexpr std::array kNames{
    std::pair{ActionKind::PlugAttackerEv, "plug_attacker_ev"},
    std::pair{ActionKind::WaitForVictimSession, "wait_for_victim_session"},
    std::pair{ActionKind::SendStopToVictimEvse, "send_stop_to_victim_evse"},
    std::pair{ActionKind::SetDischargeSchedule, "set_discharge_schedule"},
    std::pair{ActionKind::SetOverchargeSchedule, "set_overcharge_schedule"},
    std::pair{ActionKind::Unplug, "unplug"},
};

}  // namespace

AttackScript AttackScript::standard() {
    return AttackScript{{
        {ActionKind::PlugAttackerEv, 2.0, 0.0},
        {ActionKind::WaitForVictimSession, 20.0, 0.0},
        {ActionKind::SendStopToVictimEvse, 5.0, 0.0},
    }};
}

std::string to_string(ActionKind k) {
    for (const auto& [kind, name] : kNames) {
        if (kind == k) return name;
    }
    return "?";
}

ActionKind action_from_string(const std::string& s) {
    for (const auto& [kind, name] : kNames) {
        if (s == name) return kind;
    }
    throw std::invalid_argument("unknown attack action: " + s);
}

void validate(const AttackScript& script) {
    bool plugged = false;
    bool victim_charging = false;
    for (std::size_t i = 0; i < script.actions.size(); ++i) {
        const AttackAction& a = script.actions[i];
        const std::string where = "action " + std::to_string(i) + " (" + to_string(a.kind) + ")";
        if (a.delay < 0.0) throw ChoreographyViolation(where + ": negative delay");
        switch (a.kind) {
            case ActionKind::PlugAttackerEv:
                if (plugged) throw ChoreographyViolation(where + ": attacker EV already plugged");
                plugged = true;
                break;
            case ActionKind::WaitForVictimSession:
                victim_charging = true;
                break;
            case ActionKind::SendStopToVictimEvse:
                if (!victim_charging) {
                    throw ChoreographyViolation(where + ": victim session not yet charging");
                }
                if (!plugged) throw ChoreographyViolation(where + ": attacker EV not plugged");
                break;
            case ActionKind::SetDischargeSchedule:
            case ActionKind::SetOverchargeSchedule:
                if (plugged) {
                    throw ChoreographyViolation(where + ": schedule must be set before plugging");
                }
                if (!(a.energy_kwh > 0.0)) throw ChoreographyViolation(where + ": energy must be positive");
                break;
            case ActionKind::Unplug:
                if (!plugged) throw ChoreographyViolation(where + ": attacker EV not plugged");
                plugged = false;
                break;
        }
    }
}

}  // namespace evx::attacker
