#include "evx/attacker/choreography.hpp"

#include <memory>

namespace evx::attacker {

using session::Phase;

namespace {

class Director {
public:
    Director(const AttackScript& script, harness::World& world) : script_(script), world_(world) {}

    void install() {
        world_.victim_phase_hook = [this](Phase p) {
            if (p == Phase::Charging && waiting_for_victim_) {
                waiting_for_victim_ = false;
                const double linger = script_.actions[cursor_].delay;
                world_.after(linger, [this] {
                    world_.note("victim departs");
                    complete();
                });
            }
            if (p == Phase::Stopped && world_.victim().state().furthest < Phase::Charging) thwarted();
        };
        schedule_next();
    }

private:
    void schedule_next() {
        if (aborted_ || cursor_ >= script_.actions.size()) return;
        const AttackAction& a = script_.actions[cursor_];
        if (a.kind == ActionKind::WaitForVictimSession) {
            if (world_.victim().phase() == Phase::Charging) {
                world_.after(a.delay, [this] {
                    world_.note("victim departs");
                    complete();
                });
            } else {
                waiting_for_victim_ = true;
            }
            return;
        }
        world_.after(a.delay, [this] { perform(); });
    }

    void complete() {
        ++cursor_;
        schedule_next();
    }

    void thwarted() {
        if (aborted_) return;
        aborted_ = true;
        waiting_for_victim_ = false;
        world_.note("attack thwarted: victim session failed before charging");
    }

    void violation(const std::string& what) {
        throw ChoreographyViolation(to_string(script_.actions[cursor_].kind) + ": " + what);
    }

    void perform() {
        if (aborted_) return;
        const AttackAction& a = script_.actions[cursor_];
        harness::EvNode& attacker = world_.attacker();
        world_.note("attacker: " + to_string(a.kind));
        switch (a.kind) {
            case ActionKind::PlugAttackerEv:
                world_.plug(attacker);
                break;
            case ActionKind::SendStopToVictimEvse:
                if (world_.victim().phase() != Phase::Charging) violation("victim session is not charging");
                if (attacker.phase() != Phase::Charging) violation("attacker session is not charging");
                // The attacker's own session is the one relayed to the victim's column.
                attacker.request_stop(world_.sim());
                break;
            case ActionKind::SetDischargeSchedule:
            case ActionKind::SetOverchargeSchedule: {
                if (attacker.phase() > Phase::SetUp) violation("charge parameters already negotiated");
                const double kwh = a.kind == ActionKind::SetDischargeSchedule ? -a.energy_kwh : a.energy_kwh;
                const auto& p = world_.config().attacker;
                attacker.set_requested(session::ChargeSchedule::from_kwh(kwh, p.max_kw, 0));
                break;
            }
            case ActionKind::Unplug:
                if (!attacker.plugged()) violation("attacker EV is not plugged");
                world_.unplug(attacker);
                break;
            case ActionKind::WaitForVictimSession:
                break;
        }
        complete();
    }

    const AttackScript& script_;
    harness::World& world_;
    std::size_t cursor_ = 0;
    bool waiting_for_victim_ = false;
    bool aborted_ = false;
};

}  // namespace

std::vector<harness::TraceEntry> run_evexchange(const AttackScript& script, harness::World& world) {
    validate(script);
    if (world.config().topology != harness::Topology::CrossRelay) {
        throw ChoreographyViolation("relay devices are not in cross_relay mode");
    }
    auto director = std::make_unique<Director>(script, world);
    director->install();
    world.run();
    world.victim_phase_hook = nullptr;
    return world.trace();
}

}  // namespace evx::attacker
