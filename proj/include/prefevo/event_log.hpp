#pragma once

/// Append-only trial-event log, one JSON object per line.
///
/// Event types, in order: `session` (generation-0 pool), then per generation
/// its `comparison` events followed by a `generation` event with the updated
/// pool, then `evaluation` events and a final `done`. Every event carries the
/// full gain vectors involved, so a log plus its config is enough to rebuild
/// the whole run.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "prefevo/session.hpp"

namespace prefevo {

/// All events implied by a session state, in log order.
std::vector<nlohmann::json> session_events(const SessionState& state);

/// JSON-lines rendering of session_events.
std::string render_event_log(const SessionState& state);

std::vector<nlohmann::json> parse_event_log(std::string_view text);

/// Re-runs the session from `config`, feeding back every recorded rating.
/// Throws FormatError if a recorded trial disagrees with the regenerated one
/// (wrong config or tampered log).
SessionState replay_events(const ExperimentConfig& config, std::span<const nlohmann::json> events);

} // namespace prefevo
