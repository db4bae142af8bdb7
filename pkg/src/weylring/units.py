"""Unit conventions and conversion helpers.

Every rate and frequency inside this package is an angular frequency in
rad/us.  Two quoting conventions appear in the superconducting-circuit
literature and must not be mixed:

* decay rates quoted as plain "MHz" are angular rates: kappa = 5 MHz
  means kappa = 5 rad/us (5e6 s^-1 read as an angular rate);
* coherent frequencies quoted as "2pi x f MHz" carry the 2pi explicitly:
  lambda_r = 2pi x 41 MHz means lambda_r = 2*pi*41 rad/us.

Field-axis values quoted as "B/2pi in MHz" convert back by dividing the
internal rad/us value by 2pi.  Sanity anchor: 0.427*kappa with kappa = 5
gives 2.135 rad/us = 0.34 in B/2pi MHz units.
"""

import math

TWO_PI = 2.0 * math.pi


def angular_rate_from_mhz(rate_mhz: float) -> float:
    """Angular rate in rad/us from a plain-MHz decay-rate quote.

    Numerically the identity; exists so call sites document which quoting
    convention a number came from.
    """
    return float(rate_mhz)


def angular_from_cycles_mhz(freq_mhz: float) -> float:
    """rad/us from a '2pi x MHz' frequency quote (multiplies by 2pi)."""
    return TWO_PI * freq_mhz


def cycles_mhz_from_angular(omega: float) -> float:
    """'B/2pi MHz' axis value from an internal rad/us quantity."""
    return omega / TWO_PI
