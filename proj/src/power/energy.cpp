#include "evx/power/energy.hpp"

#include <algorithm>
#include <cmath>

namespace evx::power {

WattSeconds kwh_to_ws(double kwh) {
    return static_cast<WattSeconds>(std::llround(kwh * kWattSecondsPerKwh));
}

double ws_to_kwh(WattSeconds ws) {
    return static_cast<double>(ws) / kWattSecondsPerKwh;
}

Battery Battery::from_kwh(double capacity_kwh, double soc) {
    Battery b;
    b.capacity = kwh_to_ws(capacity_kwh);
    b.stored = static_cast<WattSeconds>(
        std::llround(static_cast<double>(b.capacity) * std::clamp(soc, 0.0, 1.0)));
    return b;
}

MeterReading tick_power(Evse& evse, Battery& attached, double dt, double now) {
    if (!evse.delivery) throw NotEnergized(evse.id);
    Delivery& d = *evse.delivery;

    const double magnitude_w = static_cast<double>(d.power_w < 0 ? -d.power_w : d.power_w);
    // Floor keeps |energy| <= max_power * interval.
    WattSeconds step = static_cast<WattSeconds>(std::floor(magnitude_w * std::max(dt, 0.0)));
    step = std::min(step, std::max<WattSeconds>(0, d.energy_limit - d.transferred));

    WattSeconds signed_step = 0;
    if (d.power_w >= 0) {
        const WattSeconds headroom = attached.capacity - attached.stored;
        if (step > headroom) {
            attached.raise(AbuseFlag::OverchargeCommanded);
            step = headroom;
        }
        attached.stored += step;
        signed_step = step;
    } else {
        if (step > attached.stored) {
            attached.raise(AbuseFlag::DeepDischargeCommanded);
            step = attached.stored;
        }
        attached.stored -= step;
        signed_step = -step;
    }
    d.transferred += step;
    return MeterReading{evse.id, signed_step, dt, now};
}

}  // namespace evx::power
