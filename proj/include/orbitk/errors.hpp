#pragma once

#include <stdexcept>
#include <string>

namespace orbitk {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- 2x2 algebra ---

/// Matrix fails the unit-determinant requirement.
class DeterminantError : public Error { public: using Error::Error; };

/// Matrix is not of the reflected-symmetric form (equal diagonal entries).
class NotSLRForm : public Error { public: using Error::Error; };

/// Trace sits on (or within tolerance of) +-2 where the sign invariant
/// and hyperbolic predicates are undefined.
class DegenerateTrace : public Error { public: using Error::Error; };

// --- systems ---

/// Newton iteration failed to converge.
class NoConvergence : public Error { public: using Error::Error; };

/// No real start state exists on the fixed set at the requested energy.
class EnergyUnreachable : public Error { public: using Error::Error; };

/// Trajectory or query point left the open domain of the vector field.
class DomainExit : public Error { public: using Error::Error; };

// --- flow ---

/// Step-size underflow, non-finite state, or a broken accuracy guarantee.
class StepFailure : public Error { public: using Error::Error; };

/// Requested event did not occur (or the event function is degenerate).
class EventNotFound : public Error { public: using Error::Error; };

// --- frames / reduction ---

/// Frame construction degenerates: the fixed set is tangent to the energy
/// level at the base point.
class TangencyError : public Error { public: using Error::Error; };

/// Base point is an equilibrium; the quotient by the flow direction
/// does not exist.
class ZeroVectorField : public Error { public: using Error::Error; };

/// Linear map does not preserve the energy-level tangent space.
class NotEnergyPreserving : public Error { public: using Error::Error; };

/// Claimed symmetry of an orbit fails its residual check.
class SymmetryViolated : public Error { public: using Error::Error; };

// --- shooting ---

/// Shooting residual has no sign change across the search bracket.
class NoSignChange : public Error { public: using Error::Error; };

/// Continuation step underflow; partial results are still returned by value.
class ContinuationStalled : public Error { public: using Error::Error; };

// --- two-to-one cover ---

/// Configuration passes through the branch point of the squaring map.
class OriginError : public Error { public: using Error::Error; };

/// Curve winds an even number of times around the origin; its lift is a
/// pair of disjoint loops, not a single closed orbit.
class EvenWinding : public Error { public: using Error::Error; };

} // namespace orbitk
