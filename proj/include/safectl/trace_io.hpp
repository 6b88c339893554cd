#ifndef SAFECTL_TRACE_IO_HPP
#define SAFECTL_TRACE_IO_HPP

#include <string>

#include "safectl/harness.hpp"

namespace safectl {

/// Fixed trace schema, one row per step:
///   t, px, py, theta, v, u_nom_0, u_nom_1, u_app_0, u_app_1,
///   phi, phi0, nominal_status, phase, trigger_fired, queries
inline constexpr const char* kTraceHeader =
    "t,px,py,theta,v,u_nom_0,u_nom_1,u_app_0,u_app_1,phi,phi0,nominal_status,phase,trigger_fired,queries";

std::string trace_to_csv(const EpisodeTrace& trace);

void write_trace_csv(const std::string& path, const EpisodeTrace& trace);

struct TraceSchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses a trace CSV back into step records (states, controls, phi columns).
/// Throws TraceSchemaError on a header or column-count mismatch.
EpisodeTrace read_trace_csv(const std::string& path);

}  // namespace safectl

#endif  // SAFECTL_TRACE_IO_HPP
