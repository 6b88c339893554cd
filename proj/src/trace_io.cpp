#include "safectl/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace safectl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double ctrl_at(const ControlVector& u, std::size_t i) { return i < u.size() ? u[i] : 0.0; }

}  // namespace

std::string trace_to_csv(const EpisodeTrace& trace) {
    std::ostringstream os;
    os << kTraceHeader << "\n";
    for (const TraceStep& s : trace.steps) {
        os << s.t << ',' << fmt(s.state.px) << ',' << fmt(s.state.py) << ',' << fmt(s.state.theta) << ','
           << fmt(s.state.v) << ',' << fmt(ctrl_at(s.u_nominal, 0)) << ',' << fmt(ctrl_at(s.u_nominal, 1))
           << ',' << fmt(ctrl_at(s.u_applied, 0)) << ',' << fmt(ctrl_at(s.u_applied, 1)) << ','
           << fmt(s.phi) << ',' << fmt(s.phi0) << ',' << to_string(s.nominal_status) << ','
           << to_string(s.phase) << ',' << (s.trigger_fired ? 1 : 0) << ',' << s.queries << "\n";
    }
    return os.str();
}

void write_trace_csv(const std::string& path, const EpisodeTrace& trace) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace file for writing: " + path);
    f << trace_to_csv(trace);
}

EpisodeTrace read_trace_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw TraceSchemaError("cannot open trace file: " + path);

    std::string line;
    if (!std::getline(f, line)) throw TraceSchemaError("trace file is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw TraceSchemaError("trace header mismatch in " + path);

    EpisodeTrace trace;
    long row = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 15) {
            throw TraceSchemaError("row " + std::to_string(row) + " has " + std::to_string(cols.size()) +
                                   " columns, expected 15");
        }
        TraceStep s;
        s.t = std::stol(cols[0]);
        s.state.px = std::stod(cols[1]);
        s.state.py = std::stod(cols[2]);
        s.state.theta = std::stod(cols[3]);
        s.state.v = std::stod(cols[4]);
        s.u_nominal = {std::stod(cols[5]), std::stod(cols[6])};
        s.u_applied = {std::stod(cols[7]), std::stod(cols[8])};
        s.phi = std::stod(cols[9]);
        s.phi0 = std::stod(cols[10]);
        if (cols[11] == "SAFE") {
            s.nominal_status = SafetyStatus::SAFE;
        } else if (cols[11] == "UNSAFE") {
            s.nominal_status = SafetyStatus::UNSAFE;
        } else {
            throw TraceSchemaError("row " + std::to_string(row) + ": bad nominal_status");
        }
        if (cols[12] == "PASS_THROUGH") {
            s.phase = ProjectionPhase::PASS_THROUGH;
        } else if (cols[12] == "PHASE1") {
            s.phase = ProjectionPhase::PHASE1;
        } else if (cols[12] == "PHASE2") {
            s.phase = ProjectionPhase::PHASE2;
        } else {
            throw TraceSchemaError("row " + std::to_string(row) + ": bad phase");
        }
        s.trigger_fired = cols[13] == "1";
        s.queries = std::stol(cols[14]);
        trace.steps.push_back(std::move(s));
        ++row;
    }
    if (!trace.steps.empty()) trace.final_state = trace.steps.back().state;
    return trace;
}

}  // namespace safectl
