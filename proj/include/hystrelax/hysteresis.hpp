#pragma once

#include <algorithm>
#include <stdexcept>

namespace hystrelax {

/// Closed interval [lo, hi] the vegetation density is confined to.
/// Both faces are state-dependent: they move with the prey and predator
/// densities. A collapsed band (lo == hi) is legal.
template <typename Scalar = double>
struct BandT {
    Scalar lo{0};
    Scalar hi{1};

    bool valid() const { return Scalar{0} <= lo && lo <= hi && hi <= Scalar{1}; }
};

using Band = BandT<double>;

/// Yosida force (1/mu) * ([sigma - hi]^+ - [lo - sigma]^+).
/// Monotone nondecreasing in sigma, zero exactly on the band.
template <typename Scalar>
Scalar yosida_force(Scalar sigma, const BandT<Scalar>& band, Scalar mu) {
    if (!(mu > Scalar{0})) {
        throw std::invalid_argument("yosida_force: mu must be positive");
    }
    const Scalar above = std::max(sigma - band.hi, Scalar{0});
    const Scalar below = std::max(band.lo - sigma, Scalar{0});
    return (above - below) / mu;
}

/// Nearest point of the band; identity on [lo, hi].
template <typename Scalar>
Scalar project(Scalar sigma, const BandT<Scalar>& band) {
    return std::min(std::max(sigma, band.lo), band.hi);
}

/// Whether (sigma, force) lies within tol of the graph of the band
/// subdifferential: zero force in the interior, a half-line of forces on
/// each face, any force when the band is collapsed.
template <typename Scalar>
bool subdiff_contains(Scalar sigma, const BandT<Scalar>& band, Scalar force, Scalar tol) {
    if (sigma < band.lo - tol || sigma > band.hi + tol) return false;
    if (sigma < band.hi - tol && force > tol) return false;
    if (sigma > band.lo + tol && force < -tol) return false;
    return true;
}

/// Backward-Euler resolvent of the Yosida force: the unique sigma with
///   sigma + (dt/mu) * ([sigma - hi]^+ - [lo - sigma]^+) = rhs,
/// solved in closed form branch by branch. Tends to project(rhs, band)
/// as dt/mu grows, and returns rhs unchanged when rhs is in the band.
template <typename Scalar>
Scalar implicit_yosida_step(Scalar rhs, const BandT<Scalar>& band, Scalar mu, Scalar dt) {
    if (!(mu > Scalar{0})) {
        throw std::invalid_argument("implicit_yosida_step: mu must be positive");
    }
    if (!(dt > Scalar{0})) {
        throw std::invalid_argument("implicit_yosida_step: dt must be positive");
    }
    const Scalar ratio = dt / mu;
    if (rhs > band.hi) return band.hi + (rhs - band.hi) / (Scalar{1} + ratio);
    if (rhs < band.lo) return band.lo + (rhs - band.lo) / (Scalar{1} + ratio);
    return rhs;
}

}  // namespace hystrelax
