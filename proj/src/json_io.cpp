// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "json_io.hpp"

namespace helps {

nlohmann::json channel_config_to_json(const ChannelConfig& c) {
    return {{"subframe_duration_ms", c.subframe_duration_ms},
            {"bandwidth_hz", c.bandwidth_hz},
            {"period_ms", c.period_ms},
            {"tx_power_dbm", c.tx_power_dbm},
            {"dmrs_symbols_per_subframe", c.dmrs_symbols_per_subframe},
            {"carrier_hz", c.carrier_hz},
            {"target_id", c.target_id}};
}

ChannelConfig channel_config_from_json(const nlohmann::json& j) {
    ChannelConfig c;
    c.subframe_duration_ms = j.value("subframe_duration_ms", c.subframe_duration_ms);
    c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
    c.period_ms = j.value("period_ms", c.period_ms);
    c.tx_power_dbm = j.value("tx_power_dbm", c.tx_power_dbm);
    c.dmrs_symbols_per_subframe = j.value("dmrs_symbols_per_subframe", c.dmrs_symbols_per_subframe);
    c.carrier_hz = j.value("carrier_hz", c.carrier_hz);
    c.target_id = j.value("target_id", c.target_id);
    return c;
}

}  // namespace helps
