"""Mirror round trip and Beer-Lambert absorption by the second ensemble.

The reflected fluorescence is attenuated by a Lorentzian optical-depth
profile fixed in the lab frame (the absorber is a cloud of ground-state
atoms, so its line does not move with the drive laser). Spectra, by
contrast, live on a laser-relative frequency axis, so for a drive detuned
by `delta` the filter center lands at `shift - delta` on the spectrum grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .spectrum import (
    DEFAULT_GAMMA_MHZ,
    DriveParams,
    SpectrumGrid,
    normalize_to_counts,
    sample_spectrum,
)

# Off-resonance cascaded/original count ratio; folds fiber loss and
# imperfect mirror reflection into one number.
DEFAULT_PATH_EFFICIENCY = 0.9


class UnnormalizedSpectrumError(ValueError):
    """Raised when a cascade integral is asked for a spectrum that was never
    rescaled to a measured photon number."""


@dataclass(frozen=True)
class AbsorptionProfile:
    """Second-ensemble filter parameters.

    alpha is the peak optical depth; width is the full width at half
    maximum of the Lorentzian profile in MHz (not the half-width); shift is
    the filter center in MHz relative to the unshifted atomic line
    (positive = blue of it); path_efficiency covers fiber loss and mirror
    reflection and multiplies the transmission everywhere.
    """

    alpha: float
    width: float
    shift: float = 0.0
    path_efficiency: float = DEFAULT_PATH_EFFICIENCY

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"optical depth must be >= 0, got {self.alpha}")
        if self.width <= 0:
            raise ValueError(f"filter width must be > 0, got {self.width}")
        if not 0.0 < self.path_efficiency <= 1.0:
            raise ValueError(
                f"path efficiency must be in (0, 1], got {self.path_efficiency}"
            )


def lorentzian_profile(omega, prof: AbsorptionProfile):
    """Unit-peak Lorentzian L(omega) = 1 / (1 + 4 ((omega - shift)/width)^2).

    Equals 1 at the filter center and 1/2 one half-width away.
    """
    return 1.0 / (1.0 + 4.0 * ((np.asarray(omega, dtype=float) - prof.shift) / prof.width) ** 2)


def transmission(omega, prof: AbsorptionProfile):
    """Beer-Lambert transmission path_efficiency * exp(-alpha * L(omega))."""
    return prof.path_efficiency * np.exp(-prof.alpha * lorentzian_profile(omega, prof))


def cascaded_count(
    spec: SpectrumGrid,
    prof: AbsorptionProfile,
    drive_detuning: float = 0.0,
) -> float:
    """Photon count surviving the round trip through the absorbing ensemble.

    Integrates density(omega) * transmission(omega) over the grid and adds
    the elastic weight attenuated at omega = 0, since elastic scattering
    preserves the drive frequency. The filter is pinned to the lab frame:
    on the laser-relative grid its center sits at shift - drive_detuning.
    The spectrum must have been normalized to a measured count first.
    """
    if spec.counts is None:
        raise UnnormalizedSpectrumError(
            "spectrum was not normalized to a photon count (use normalize_to_counts)"
        )
    eff_prof = replace(prof, shift=prof.shift - drive_detuning)
    trans = transmission(spec.offsets, eff_prof)
    inelastic = np.trapezoid(spec.density * trans, spec.offsets)
    elastic = spec.elastic_weight * transmission(0.0, eff_prof)
    return float(inelastic + elastic)


def ratio_curve(
    detunings,
    s0: float,
    prof: AbsorptionProfile,
    original_counts,
    gamma: float = DEFAULT_GAMMA_MHZ,
    grid_span: float = 10.0,
    grid_step: float | None = None,
) -> list[float]:
    """Cascaded/original count ratio for each drive detuning.

    The emission spectrum is recomputed per detuning, normalized to the
    measured original count there, and sent through the filter. The curve
    dips where the drive sits on the filter center and the dip gets
    shallower with increasing s0 as the sidebands escape the filter.
    """
    detunings = list(detunings)
    original_counts = list(original_counts)
    if len(detunings) != len(original_counts):
        raise ValueError(
            f"{len(detunings)} detunings vs {len(original_counts)} counts"
        )
    if any(n <= 0 for n in original_counts):
        raise ValueError("original counts must be > 0")
    out = []
    for delta, n_orig in zip(detunings, original_counts):
        spec = normalize_to_counts(
            sample_spectrum(DriveParams(s0, delta, gamma), grid_span, grid_step),
            n_orig,
        )
        out.append(cascaded_count(spec, prof, drive_detuning=delta) / n_orig)
    return out
