#include "evx/harness/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace evx::harness {

namespace pt = boost::property_tree;

namespace {

struct WirelessVariant {
    const char* name;
    netsim::PropagationModel model;
    double distance;
    netsim::WifiStandard standard;
};

constexpr WirelessVariant kWirelessVariants[] = {
    {"ldpl_2m_g", netsim::PropagationModel::LogDistancePathLoss, 2.0, netsim::WifiStandard::G80211},
    {"ldpl_2m_ac", netsim::PropagationModel::LogDistancePathLoss, 2.0, netsim::WifiStandard::AC80211},
    {"ldpl_10m_g", netsim::PropagationModel::LogDistancePathLoss, 10.0, netsim::WifiStandard::G80211},
    {"ldpl_10m_ac", netsim::PropagationModel::LogDistancePathLoss, 10.0, netsim::WifiStandard::AC80211},
    {"lns_2m_g", netsim::PropagationModel::LogNormalShadowing, 2.0, netsim::WifiStandard::G80211},
    {"lns_2m_ac", netsim::PropagationModel::LogNormalShadowing, 2.0, netsim::WifiStandard::AC80211},
    {"lns_10m_g", netsim::PropagationModel::LogNormalShadowing, 10.0, netsim::WifiStandard::G80211},
    {"lns_10m_ac", netsim::PropagationModel::LogNormalShadowing, 10.0, netsim::WifiStandard::AC80211},
};

Scenario relay_preset(std::string name, PeerLink peer) {
    Scenario s;
    s.name = std::move(name);
    s.world.topology = Topology::CrossRelay;
    s.world.peer = peer;
    s.attack_script = attacker::AttackScript::standard();
    return s;
}

template <class E>
struct EnumName {
    E value;
    const char* name;
};

constexpr EnumName<Topology> kTopologies[] = {{Topology::LegitDirect, "legit_direct"},
                                              {Topology::DevicesBridging, "devices_bridging"},
                                              {Topology::CrossRelay, "cross_relay"}};
constexpr EnumName<PeerKind> kPeerKinds[] = {{PeerKind::Wired, "wired"},
                                             {PeerKind::WifiRouter5cm, "wifi_router_5cm"},
                                             {PeerKind::WifiRouter2m, "wifi_router_2m"},
                                             {PeerKind::WifiAdhoc, "wifi_adhoc"},
                                             {PeerKind::Wireless, "wireless"},
                                             {PeerKind::Custom, "custom"}};
constexpr EnumName<attacker::RelayMode> kModes[] = {{attacker::RelayMode::Off, "off"},
                                                    {attacker::RelayMode::Bridge, "bridge"},
                                                    {attacker::RelayMode::CrossRelay, "cross_relay"}};
constexpr EnumName<attacker::EvasionKind> kEvasions[] = {{attacker::EvasionKind::None, "none"},
                                                         {attacker::EvasionKind::EarlyGuess, "early_guess"}};
constexpr EnumName<netsim::PropagationModel> kPropagation[] = {
    {netsim::PropagationModel::LogDistancePathLoss, "LDPL"},
    {netsim::PropagationModel::LogNormalShadowing, "LNS"}};
constexpr EnumName<netsim::WifiStandard> kStandards[] = {{netsim::WifiStandard::G80211, "80211g"},
                                                         {netsim::WifiStandard::AC80211, "80211ac"}};
constexpr EnumName<netsim::LatencyKind> kLatencyKinds[] = {{netsim::LatencyKind::Constant, "constant"},
                                                           {netsim::LatencyKind::Jittered, "jittered"}};

template <class E, std::size_t M>
const char* name_of(const EnumName<E> (&table)[M], E v) {
    for (const auto& e : table) {
        if (e.value == v) return e.name;
    }
    return "?";
}

/// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

/// Reads typed values out of the tree, remembering which keys were consumed
/// so that leftovers can be reported as unknown settings.
class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) {
        const std::string field = section + "." + key;
        used_.insert(field);
        auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto sec = tree_.get_child_optional(section);
        return sec && sec->get_child_optional(key);
    }

    void str(const std::string& section, const std::string& key, std::string& out) {
        if (auto v = raw(section, key)) {
            if (v->empty()) throw ConfigError(section + "." + key, "must not be empty");
            out = *v;
        }
    }

    void real(const std::string& section, const std::string& key, double& out) {
        auto v = raw(section, key);
        if (!v) return;
        double d = 0.0;
        const char* b = v->data();
        const char* e = b + v->size();
        auto [p, ec] = std::from_chars(b, e, d);
        if (ec != std::errc() || p != e) throw ConfigError(section + "." + key, "not a number: '" + *v + "'");
        out = d;
    }

    template <class I>
    void integer(const std::string& section, const std::string& key, I& out) {
        auto v = raw(section, key);
        if (!v) return;
        I x{};
        const char* b = v->data();
        const char* e = b + v->size();
        auto [p, ec] = std::from_chars(b, e, x);
        if (ec != std::errc() || p != e) {
            throw ConfigError(section + "." + key, "not a non-negative integer: '" + *v + "'");
        }
        out = x;
    }

    void boolean(const std::string& section, const std::string& key, bool& out) {
        auto v = raw(section, key);
        if (!v) return;
        if (*v == "true" || *v == "on" || *v == "1") {
            out = true;
        } else if (*v == "false" || *v == "off" || *v == "0") {
            out = false;
        } else {
            throw ConfigError(section + "." + key, "expected true/false, got '" + *v + "'");
        }
    }

    template <class E, std::size_t M>
    void choice(const std::string& section, const std::string& key, const EnumName<E> (&table)[M], E& out) {
        auto v = raw(section, key);
        if (!v) return;
        for (const auto& e : table) {
            if (*v == e.name) {
                out = e.value;
                return;
            }
        }
        throw ConfigError(section + "." + key, "unknown value '" + *v + "'");
    }

    void check_unused() const {
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) {
                throw ConfigError(section, "setting outside of a section");
            }
            for (const auto& [key, _] : body) {
                if (!used_.count(section + "." + key)) throw ConfigError(section + "." + key, "unknown setting");
            }
        }
    }

private:
    const pt::ptree& tree_;
    std::set<std::string> used_;
};

attacker::AttackScript parse_script(const std::string& text) {
    attacker::AttackScript script;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        item = item.substr(first, last - first + 1);

        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string part;
        while (std::getline(is, part, ':')) parts.push_back(part);
        if (parts.empty() || parts.size() > 3) {
            throw ConfigError("attacker.script", "malformed action '" + item + "'");
        }
        attacker::AttackAction a;
        try {
            a.kind = attacker::action_from_string(parts[0]);
            if (parts.size() > 1) a.delay = std::stod(parts[1]);
            if (parts.size() > 2) a.energy_kwh = std::stod(parts[2]);
        } catch (const std::exception& e) {
            throw ConfigError("attacker.script", "malformed action '" + item + "'");
        }
        script.actions.push_back(a);
    }
    return script;
}

std::string format_script(const attacker::AttackScript& script) {
    std::string out;
    for (const auto& a : script.actions) {
        if (!out.empty()) out += ", ";
        out += attacker::to_string(a.kind) + ":" + fmt_double(a.delay);
        if (a.energy_kwh != 0.0) out += ":" + fmt_double(a.energy_kwh);
    }
    return out;
}

void read_ev(Reader& r, const std::string& section, EvParams& ev) {
    r.str(section, "contract", ev.contract_id);
    r.real(section, "capacity_kwh", ev.capacity_kwh);
    r.real(section, "soc", ev.soc);
    r.real(section, "target_kwh", ev.target_kwh);
    r.real(section, "max_kw", ev.max_kw);
}

void write_ev(std::ostream& out, const std::string& section, const EvParams& ev) {
    out << "\n[" << section << "]\n"
        << "contract = " << ev.contract_id << "\n"
        << "capacity_kwh = " << fmt_double(ev.capacity_kwh) << "\n"
        << "soc = " << fmt_double(ev.soc) << "\n"
        << "target_kwh = " << fmt_double(ev.target_kwh) << "\n"
        << "max_kw = " << fmt_double(ev.max_kw) << "\n";
}

}  // namespace

void Scenario::validate() const {
    if (name.empty()) throw ConfigError("scenario.name", "must not be empty");
    if (runs < 1) throw ConfigError("scenario.runs", "must be at least 1");
    const WorldConfig& w = world;
    try {
        w.guard.validate();
    } catch (const guard::BadConfig& e) {
        throw ConfigError("guard", e.what());
    }
    if (w.topology == Topology::DevicesBridging && w.device_mode == attacker::RelayMode::CrossRelay) {
        throw ConfigError("scenario.device_mode", "devices_bridging needs off or bridge");
    }
    if (attack_script) {
        if (w.topology != Topology::CrossRelay) {
            throw ConfigError("attacker.script", "an attack script needs the cross_relay topology");
        }
        try {
            attacker::validate(*attack_script);
        } catch (const attacker::ChoreographyViolation& e) {
            throw ConfigError("attacker.script", e.what());
        }
    }
    if (w.evasion.kind == attacker::EvasionKind::EarlyGuess &&
        (w.evasion.alphabet < 2 || w.evasion.alphabet > 256)) {
        throw ConfigError("attacker.alphabet", "must lie in [2, 256]");
    }
    if (w.peer.kind == PeerKind::Wireless && !(w.peer.wireless.distance_m >= 0.0)) {
        throw ConfigError("peer_link.distance_m", "must be non-negative");
    }
    if (w.peer.kind == PeerKind::Custom &&
        (!(w.peer.custom.base_delay >= 0.0) || !(w.peer.custom.jitter_std >= 0.0))) {
        throw ConfigError("peer_link.base_delay", "delays must be non-negative");
    }
    if (!(w.plc.base_delay >= 0.0) || !(w.plc.jitter_std >= 0.0)) {
        throw ConfigError("network.plc_base", "delays must be non-negative");
    }
    if (!(w.proc_delay >= 0.0)) throw ConfigError("attacker.proc_delay", "must be non-negative");
    if (!(w.se_turnaround >= 0.0)) throw ConfigError("station.se_turnaround", "must be non-negative");
    if (!(w.metering_interval > 0.0)) throw ConfigError("station.metering_interval", "must be positive");
    if (!(w.station_max_kw > 0.0)) throw ConfigError("station.max_kw", "must be positive");
    for (const auto& [section, ev] : {std::pair{"victim", &w.victim}, std::pair{"attacker_ev", &w.attacker}}) {
        const std::string s = section;
        if (ev->contract_id.empty()) throw ConfigError(s + ".contract", "must not be empty");
        if (!(ev->capacity_kwh > 0.0)) throw ConfigError(s + ".capacity_kwh", "must be positive");
        if (!(ev->soc >= 0.0 && ev->soc <= 1.0)) throw ConfigError(s + ".soc", "must lie in [0, 1]");
        if (!(ev->max_kw > 0.0)) throw ConfigError(s + ".max_kw", "must be positive");
    }
    if (w.victim.contract_id == w.attacker.contract_id) {
        throw ConfigError("attacker_ev.contract", "must differ from the victim's contract");
    }
    if (!(w.dwell >= 0.0)) throw ConfigError("timeline.dwell", "must be non-negative");
    if (!(w.unplug_delay >= 0.0)) throw ConfigError("timeline.unplug_delay", "must be non-negative");
    if (!(w.horizon > 0.0)) throw ConfigError("timeline.horizon", "must be positive");
}

std::vector<Scenario> list_presets() {
    std::vector<Scenario> out;

    Scenario wired;
    wired.name = "wired";
    wired.world.topology = Topology::LegitDirect;
    out.push_back(wired);

    Scenario off = wired;
    off.name = "wired_off";
    off.world.topology = Topology::DevicesBridging;
    off.world.device_mode = attacker::RelayMode::Bridge;
    out.push_back(off);

    out.push_back(relay_preset("wired_on", PeerLink{PeerKind::Wired, {}, {}}));
    out.push_back(relay_preset("wifi_5cm", PeerLink{PeerKind::WifiRouter5cm, {}, {}}));
    out.push_back(relay_preset("wifi_2m", PeerLink{PeerKind::WifiRouter2m, {}, {}}));
    out.push_back(relay_preset("wifi_adhoc", PeerLink{PeerKind::WifiAdhoc, {}, {}}));
    for (const auto& v : kWirelessVariants) {
        PeerLink peer{PeerKind::Wireless, netsim::WirelessPreset{v.model, v.distance, v.standard}, {}};
        out.push_back(relay_preset(v.name, peer));
    }
    return out;
}

Scenario preset(const std::string& name) {
    for (auto& s : list_presets()) {
        if (s.name == name) return s;
    }
    throw ConfigError(name, "unknown preset");
}

bool is_preset(const std::string& name) {
    for (const auto& s : list_presets()) {
        if (s.name == name) return true;
    }
    return false;
}

Scenario parse_scenario(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }

    Scenario s;
    Reader r(tree);
    WorldConfig& w = s.world;

    std::string base;
    r.str("scenario", "base", base);
    if (!base.empty()) s = preset(base);

    r.str("scenario", "name", s.name);
    r.choice("scenario", "topology", kTopologies, w.topology);
    r.choice("scenario", "device_mode", kModes, w.device_mode);
    r.integer("scenario", "runs", s.runs);
    r.integer("scenario", "seed", s.seed);

    r.choice("peer_link", "preset", kPeerKinds, w.peer.kind);
    r.choice("peer_link", "propagation", kPropagation, w.peer.wireless.propagation);
    r.real("peer_link", "distance_m", w.peer.wireless.distance_m);
    r.choice("peer_link", "standard", kStandards, w.peer.wireless.standard);
    r.choice("peer_link", "kind", kLatencyKinds, w.peer.custom.kind);
    r.real("peer_link", "base_delay", w.peer.custom.base_delay);
    r.real("peer_link", "jitter_std", w.peer.custom.jitter_std);
    for (const char* key : {"propagation", "distance_m", "standard"}) {
        if (r.has("peer_link", key) && w.peer.kind != PeerKind::Wireless) {
            throw ConfigError(std::string("peer_link.") + key, "only valid with preset = wireless");
        }
    }
    for (const char* key : {"kind", "base_delay", "jitter_std"}) {
        if (r.has("peer_link", key) && w.peer.kind != PeerKind::Custom) {
            throw ConfigError(std::string("peer_link.") + key, "only valid with preset = custom");
        }
    }

    r.boolean("guard", "enabled", w.guard_enabled);
    r.integer("guard", "k", w.guard.k);
    r.integer("guard", "N", w.guard.N);
    r.real("guard", "mu_max", w.guard.mu_max);
    r.real("guard", "sigma_max", w.guard.sigma_max);
    r.real("guard", "per_exchange_timeout", w.guard.per_exchange_timeout);
    r.boolean("guard", "early_abort", w.guard.early_abort);

    r.choice("attacker", "evasion", kEvasions, w.evasion.kind);
    r.integer("attacker", "alphabet", w.evasion.alphabet);
    r.real("attacker", "proc_delay", w.proc_delay);
    if (auto script = r.raw("attacker", "script")) {
        if (*script == "none") {
            s.attack_script.reset();
        } else if (*script == "standard") {
            s.attack_script = attacker::AttackScript::standard();
        } else {
            s.attack_script = parse_script(*script);
        }
    }

    read_ev(r, "victim", w.victim);
    read_ev(r, "attacker_ev", w.attacker);

    r.real("station", "max_kw", w.station_max_kw);
    r.boolean("station", "bidirectional", w.bidirectional);
    r.real("station", "metering_interval", w.metering_interval);
    r.real("station", "se_turnaround", w.se_turnaround);

    r.real("network", "plc_base", w.plc.base_delay);
    r.real("network", "plc_jitter", w.plc.jitter_std);
    w.plc.kind = netsim::LatencyKind::Jittered;

    r.real("timeline", "dwell", w.dwell);
    r.real("timeline", "unplug_delay", w.unplug_delay);
    r.real("timeline", "horizon", w.horizon);

    r.check_unused();
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open scenario file");
    return parse_scenario(in);
}

void write_scenario(std::ostream& out, const Scenario& s) {
    const WorldConfig& w = s.world;
    out << "[scenario]\n"
        << "name = " << s.name << "\n"
        << "topology = " << name_of(kTopologies, w.topology) << "\n"
        << "device_mode = " << name_of(kModes, w.device_mode) << "\n"
        << "runs = " << s.runs << "\n"
        << "seed = " << s.seed << "\n";

    out << "\n[peer_link]\n"
        << "preset = " << name_of(kPeerKinds, w.peer.kind) << "\n";
    if (w.peer.kind == PeerKind::Wireless) {
        out << "propagation = " << name_of(kPropagation, w.peer.wireless.propagation) << "\n"
            << "distance_m = " << fmt_double(w.peer.wireless.distance_m) << "\n"
            << "standard = " << name_of(kStandards, w.peer.wireless.standard) << "\n";
    }
    if (w.peer.kind == PeerKind::Custom) {
        out << "kind = " << name_of(kLatencyKinds, w.peer.custom.kind) << "\n"
            << "base_delay = " << fmt_double(w.peer.custom.base_delay) << "\n"
            << "jitter_std = " << fmt_double(w.peer.custom.jitter_std) << "\n";
    }

    out << "\n[guard]\n"
        << "enabled = " << (w.guard_enabled ? "true" : "false") << "\n"
        << "k = " << w.guard.k << "\n"
        << "N = " << w.guard.N << "\n"
        << "mu_max = " << fmt_double(w.guard.mu_max) << "\n"
        << "sigma_max = " << fmt_double(w.guard.sigma_max) << "\n"
        << "per_exchange_timeout = " << fmt_double(w.guard.per_exchange_timeout) << "\n"
        << "early_abort = " << (w.guard.early_abort ? "true" : "false") << "\n";

    out << "\n[attacker]\n"
        << "evasion = " << name_of(kEvasions, w.evasion.kind) << "\n"
        << "alphabet = " << w.evasion.alphabet << "\n"
        << "proc_delay = " << fmt_double(w.proc_delay) << "\n"
        << "script = " << (s.attack_script ? format_script(*s.attack_script) : "none") << "\n";

    write_ev(out, "victim", w.victim);
    write_ev(out, "attacker_ev", w.attacker);

    out << "\n[station]\n"
        << "max_kw = " << fmt_double(w.station_max_kw) << "\n"
        << "bidirectional = " << (w.bidirectional ? "true" : "false") << "\n"
        << "metering_interval = " << fmt_double(w.metering_interval) << "\n"
        << "se_turnaround = " << fmt_double(w.se_turnaround) << "\n";

    out << "\n[network]\n"
        << "plc_base = " << fmt_double(w.plc.base_delay) << "\n"
        << "plc_jitter = " << fmt_double(w.plc.jitter_std) << "\n";

    out << "\n[timeline]\n"
        << "dwell = " << fmt_double(w.dwell) << "\n"
        << "unplug_delay = " << fmt_double(w.unplug_delay) << "\n"
        << "horizon = " << fmt_double(w.horizon) << "\n";
}

}  // namespace evx::harness
