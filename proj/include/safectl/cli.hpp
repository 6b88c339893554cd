#ifndef SAFECTL_CLI_HPP
#define SAFECTL_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "safectl/config.hpp"

namespace safectl::cli {

// Stable exit-code contract; scripts may branch on these.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;       // verify found a broken property
inline constexpr int kExitInfeasible = 2;      // design rule or config infeasible
inline constexpr int kExitEpisodeAborted = 3;  // mid-episode projection infeasibility
inline constexpr int kExitParse = 64;          // unreadable or malformed config
inline constexpr int kExitSchema = 65;         // trace schema mismatch
inline constexpr int kExitBadModel = 66;       // command needs a 2D control model

struct SimOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
};

int run_synthesize(const std::string& config_path, bool want_k_min, std::ostream& out, std::ostream& err);

int run_simulate(const std::string& config_path, const std::string& out_path, const SimOverrides& overrides,
                 std::ostream& out, std::ostream& err);

int run_verify(const std::string& trace_path, const std::string& config_path, std::ostream& out,
               std::ostream& err);

/// Reproduces the built-in toy comparison; mode is "discrete" or
/// "continuous-approx". An optional config file overrides the scenario.
int run_toy(const std::string& mode, const std::string& config_path, const std::string& out_path,
            const SimOverrides& overrides, std::ostream& out, std::ostream& err);

int run_scan(const std::string& config_path, const std::string& state_spec, const std::string& out_path,
             int resolution, std::ostream& out, std::ostream& err);

int run_bench(const std::string& config_path, int trials, const std::vector<int>& n_dirs_list,
              const std::string& out_path, std::ostream& out, std::ostream& err);

}  // namespace safectl::cli

#endif  // SAFECTL_CLI_HPP
