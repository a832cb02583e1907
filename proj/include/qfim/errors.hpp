#pragma once

#include <stdexcept>
#include <string>

namespace qfim {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model construction / evaluation
struct NonHermitianHamiltonian : Error { using Error::Error; };
struct ZeroCoupling : Error { using Error::Error; };
struct CutoffTooSmall : Error { using Error::Error; };
struct MissingSecondDerivatives : Error { using Error::Error; };

// Superoperator construction / application
struct BadChannel : Error { using Error::Error; };
struct ExponentialOverflow : Error { using Error::Error; };

// Stationary analysis
struct NotIrreducible : Error { using Error::Error; };
struct NotFullRank : Error { using Error::Error; };
struct NoStationaryState : Error { using Error::Error; };
struct SingularOnComplement : Error { using Error::Error; };

// Fisher pipeline
struct BoundViolated : Error { using Error::Error; };
struct ImaginaryResidue : Error { using Error::Error; };

// Asymptotics
struct BranchCut : Error { using Error::Error; };

// Trajectories
struct StepTooLarge : Error { using Error::Error; };
struct StateBlowup : Error { using Error::Error; };
struct DegenerateMean : Error { using Error::Error; };

// CLI / config
struct ValidationError : Error { using Error::Error; };

}  // namespace qfim
