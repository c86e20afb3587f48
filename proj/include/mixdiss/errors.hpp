#pragma once

#include <stdexcept>
#include <string>

namespace mixdiss {

/// Base class of every domain error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MIXDISS_DEFINE_ERROR(Name)               \
    class Name : public Error {                  \
    public:                                      \
        explicit Name(const std::string& what)   \
            : Error(#Name ": " + what) {}        \
    }

MIXDISS_DEFINE_ERROR(NonConvergence);
MIXDISS_DEFINE_ERROR(DimensionMismatch);
MIXDISS_DEFINE_ERROR(SingularResolvent);
MIXDISS_DEFINE_ERROR(NotHurwitz);
MIXDISS_DEFINE_ERROR(DegenerateGrid);
MIXDISS_DEFINE_ERROR(TruncationUnsound);
MIXDISS_DEFINE_ERROR(NonMixed);
MIXDISS_DEFINE_ERROR(NeverPassive);
MIXDISS_DEFINE_ERROR(StepTooLarge);
MIXDISS_DEFINE_ERROR(AlgebraicLoop);
MIXDISS_DEFINE_ERROR(ConfigMismatch);
MIXDISS_DEFINE_ERROR(PreconditionFailure);
MIXDISS_DEFINE_ERROR(ParseError);

#undef MIXDISS_DEFINE_ERROR

/// The homotopy construction failed at a grid point.
class BranchInfeasible : public Error {
public:
    BranchInfeasible(double tau, std::string branch)
        : Error("BranchInfeasible: branch " + branch + " at tau=" + std::to_string(tau)),
          tau_(tau),
          branch_(std::move(branch)) {}

    double tau() const noexcept { return tau_; }
    const std::string& branch() const noexcept { return branch_; }

private:
    double tau_;
    std::string branch_;
};

}  // namespace mixdiss
