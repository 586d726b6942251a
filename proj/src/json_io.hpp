// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// JSON conversions shared by the scenario document and the wire protocol.

#ifndef HELPS_SRC_JSON_IO_HPP
#define HELPS_SRC_JSON_IO_HPP

#include "json.hpp"

#include "helps/params.hpp"

namespace helps {

nlohmann::json channel_config_to_json(const ChannelConfig& c);
ChannelConfig channel_config_from_json(const nlohmann::json& j);

}  // namespace helps

#endif  // HELPS_SRC_JSON_IO_HPP
