#pragma once

/**
 * @file cli.hpp
 * @brief The `mixdiss` command-line tool and the reproduction table behind `reproduce`.
 *
 * Exit codes: 0 pass, 1 a check failed, 2 domain error, 3 usage / parse / config error.
 */

#include "mixdiss/kyp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mixdiss {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitCheckFail = 1, kExitDomain = 2, kExitUsage = 3 };

/// Entry point of the command-line tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Seeded random KYP problems (stable n <= 3, Theta22 < 0, LOW or HIGH band).
struct KypBattery {
    int problems = 0;
    int fdi_true = 0;
    int feasible = 0;
    int unknown_fdi_true = 0;
    /// FEASIBLE although the frequency-domain inequality fails
    int false_positives = 0;
    /// FEASIBLE certificates whose independent margin is >= sigma / 2
    int reverified = 0;
    /// unknown_fdi_true / fdi_true
    double unknown_rate = 0.0;
};

KypProblem random_kyp_problem(std::uint64_t seed, int index);
KypBattery run_kyp_battery(std::uint64_t seed, int count, const KypOptions& opts = {});

struct ReproRow {
    std::string name;
    double computed = 0.0;
    double reference = 0.0;  ///< the published value; NaN when there is none
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

/// Every row of `mixdiss reproduce`.
std::vector<ReproRow> reproduce_rows();

}  // namespace mixdiss
