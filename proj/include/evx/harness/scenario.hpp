#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evx/attacker/script.hpp"
#include "evx/harness/world.hpp"

namespace evx::harness {

/// Invalid scenario definition. `field` names the offending setting as
/// "section.key" (or the preset name for unknown presets).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field(std::move(field)) {}
    std::string field;
};

struct Scenario {
    std::string name;
    WorldConfig world;
    std::optional<attacker::AttackScript> attack_script;
    std::uint32_t runs = 1000;
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;
    bool is_attack() const { return world.topology == Topology::CrossRelay; }
    bool operator==(const Scenario&) const = default;
};

/// Built-in catalog: the six testbed scenarios and the eight wireless
/// propagation variants, in a fixed order.
std::vector<Scenario> list_presets();
/// Throws ConfigError for unknown names.
Scenario preset(const std::string& name);
bool is_preset(const std::string& name);

/// INI-style scenario files; the grammar is described in scenarios/README.md.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const Scenario& s);

}  // namespace evx::harness
