# Copyright 2024 TerraPower, LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Parameters of the driven dissipative Rabi lattice and its critical structure.

Units are natural: hbar = 1 and all rates are angular frequencies. The reduced
(dimensionless) couplings are measured in units of the boson frequency ``omega``.

The lattice is a chain of ``nSites`` spin-boson sites with nearest-neighbour boson
hopping ``kappa``, a coherent drive of magnitude ``F`` and phase ``chi`` on every boson,
and local boson decay ``gamma_k``.
"""
import enum
import math
from typing import NamedTuple, Optional, Sequence, Tuple, Union

from .errors import ConfigurationError, CriticalDivergence, NonUniformDecayError

DEFAULT_CRIT_TOLERANCE = 1e-9


def reduceAngle(angle: float) -> float:
    """Map an angle onto (-pi, pi]."""
    reduced = math.remainder(angle, 2.0 * math.pi)
    if reduced <= -math.pi:
        reduced += 2.0 * math.pi
    return reduced


class ModelParams(NamedTuple):
    """
    Physical couplings of the Rabi lattice.

    Build these with :py:meth:`create` or :py:meth:`fromDimensionless` so that the
    invariants are checked; the raw tuple constructor does no validation.

    Attributes
    ----------
    omega : float
        Boson frequency.
    Omega : float
        Spin frequency.
    g : float
        Spin-boson coupling.
    F : float
        Drive magnitude. The sign convention is F >= 0 with the phase absorbing signs.
    chi : float
        Drive phase in (-pi, pi].
    gamma : tuple of float
        Boson decay rate of every site.
    kappa : float
        Nearest-neighbour hopping.
    nSites : int
        Number of lattice sites.
    """

    omega: float
    Omega: float
    g: float
    F: float
    chi: float
    gamma: Tuple[float, ...]
    kappa: float
    nSites: int

    @classmethod
    def create(
        cls,
        omega: float = 1.0,
        Omega: float = 250.0,
        g: float = 0.0,
        F: float = 0.0,
        chi: float = 0.0,
        gamma: Union[float, Sequence[float]] = 0.0,
        kappa: float = 0.0,
        nSites: int = 1,
    ) -> "ModelParams":
        """Validate and build a parameter set, broadcasting a scalar decay to all sites."""
        if int(nSites) != nSites or nSites < 1:
            raise ConfigurationError(f"nSites must be a positive integer, got {nSites}")
        nSites = int(nSites)
        if not omega > 0.0:
            raise ConfigurationError(f"omega must be positive, got {omega}")
        if not Omega > 0.0:
            raise ConfigurationError(f"Omega must be positive, got {Omega}")
        if g < 0.0:
            raise ConfigurationError(f"g must be non-negative, got {g}")
        if F < 0.0:
            raise ConfigurationError(
                f"F must be non-negative (the phase carries the sign), got {F}"
            )

        if isinstance(gamma, (int, float)):
            decays = (float(gamma),) * nSites
        else:
            decays = tuple(float(gk) for gk in gamma)
            if len(decays) == 1:
                decays = decays * nSites
            if len(decays) != nSites:
                raise ConfigurationError(
                    f"gamma has {len(decays)} entries but the lattice has {nSites} sites"
                )
        if any(gk < 0.0 for gk in decays):
            raise ConfigurationError(f"decay rates must be non-negative, got {decays}")

        return cls(
            omega=float(omega),
            Omega=float(Omega),
            g=float(g),
            F=float(F),
            chi=reduceAngle(float(chi)),
            gamma=decays,
            kappa=float(kappa),
            nSites=nSites,
        )

    @classmethod
    def fromDimensionless(
        cls,
        lam: float,
        gammaT: float,
        FT: float,
        chi: float = 0.0,
        kappaT: float = 0.0,
        eta: float = 4e-3,
        omega: float = 1.0,
        nSites: int = 1,
    ) -> "ModelParams":
        """Build physical couplings from reduced ones (the inverse of :py:func:`deriveDimensionless`)."""
        if not eta > 0.0:
            raise ConfigurationError(f"eta must be positive, got {eta}")
        Omega = omega / eta
        return cls.create(
            omega=omega,
            Omega=Omega,
            g=0.5 * lam * math.sqrt(omega * Omega),
            F=FT * omega,
            chi=chi,
            gamma=gammaT * omega,
            kappa=kappaT * omega,
            nSites=nSites,
        )

    def withChanges(self, **changes) -> "ModelParams":
        """Return a revalidated copy with some fields replaced."""
        fields = self._asdict()
        fields.update(changes)
        return ModelParams.create(**fields)

    @property
    def isUniformDecay(self) -> bool:
        return all(gk == self.gamma[0] for gk in self.gamma)

    @property
    def uniformDecay(self) -> float:
        """The common decay rate, for paths that assume every site decays alike."""
        if not self.isUniformDecay:
            raise NonUniformDecayError(
                f"Site-dependent decay {self.gamma} is only supported by the numerical tiers"
            )
        return self.gamma[0]


class DimensionlessParams(NamedTuple):
    """
    Reduced couplings.

    ``lam`` is 2g/sqrt(omega Omega), ``gammaT`` is gamma/omega, ``FT`` is F/omega,
    ``kappaT`` is kappa/omega and ``eta`` is omega/Omega.
    """

    lam: float
    gammaT: float
    FT: float
    kappaT: float = 0.0
    eta: float = 4e-3


def deriveDimensionless(p: ModelParams) -> DimensionlessParams:
    """Reduce physical couplings to the dimensionless set used by the closed forms."""
    if p.omega == 0.0 or p.Omega == 0.0:
        raise ConfigurationError("omega and Omega must be non-zero to form reduced couplings")
    return DimensionlessParams(
        lam=2.0 * p.g / math.sqrt(p.omega * p.Omega),
        gammaT=p.uniformDecay / p.omega,
        FT=p.F / p.omega,
        kappaT=p.kappa / p.omega,
        eta=p.omega / p.Omega,
    )


def optimalPhase(
    lam: float, gammaT: float, kappaT: float = 0.0, lamRef: Optional[float] = None
) -> float:
    """
    Force-optimal drive phase.

    Solves tan(2 chi) = 2 gammaT / (lamRef^2 - 2 - 2 kappaT) on the branch where
    Q = (lam^2 - 2 - 2 kappaT) cos 2chi + 2 gammaT sin 2chi reaches its minimum
    -sqrt((lam^2 - 2 - 2 kappaT)^2 + 4 gammaT^2). ``lamRef`` defaults to ``lam``,
    which makes that minimum exact; passing the critical coupling instead gives the
    near-critical form quoted alongside the sensitivity curves.
    """
    ref = lam if lamRef is None else lamRef
    psi = math.atan2(2.0 * gammaT, ref * ref - 2.0 - 2.0 * kappaT)
    twoChi = psi - math.pi
    if twoChi <= -math.pi:
        twoChi += 2.0 * math.pi
    return 0.5 * twoChi


class CriticalStructure(NamedTuple):
    """
    Critical couplings, critical hoppings and optimal phases of a parameter point.

    Couplings and hoppings that are not real for this point are ``None``.
    """

    lambdaC: float
    lambdaPlus: Optional[float]
    lambdaMinus: Optional[float]
    kappaPlus: Optional[float]
    kappaMinus: Optional[float]
    kappaMin: float
    chiOpt: float
    chiOptCritical: float
    chiOptHopping: float
    chiOptHoppingCritical: Optional[float]
    hoppingEstimable: bool

    @property
    def chiOptCompanion(self) -> float:
        """Phase-optimal companion of :py:attr:`chiOpt`."""
        return reduceAngle(self.chiOpt + 0.5 * math.pi)


def _modifiedCoupling(gammaT: float, shift: float) -> Optional[float]:
    """sqrt(gammaT^2 + shift^2)/sqrt(shift), defined for shift > 0."""
    if shift <= 0.0:
        return None
    return math.sqrt(gammaT * gammaT + shift * shift) / math.sqrt(shift)


def criticalStructure(d: DimensionlessParams) -> CriticalStructure:
    """Compute the critical couplings and hoppings for a reduced parameter point."""
    lambdaC = math.sqrt(1.0 + d.gammaT**2)
    lambdaPlus = _modifiedCoupling(d.gammaT, 1.0 + d.kappaT)
    lambdaMinus = _modifiedCoupling(d.gammaT, 1.0 - d.kappaT)

    lam2 = d.lam * d.lam
    discriminant = lam2 * lam2 - 4.0 * d.gammaT**2
    if discriminant >= 0.0:
        root = math.sqrt(discriminant)
        kappaPlus = 0.5 * (lam2 - 2.0 + root)
        kappaMinus = 0.5 * (lam2 - 2.0 - root)
    else:
        kappaPlus = kappaMinus = None

    return CriticalStructure(
        lambdaC=lambdaC,
        lambdaPlus=lambdaPlus,
        lambdaMinus=lambdaMinus,
        kappaPlus=kappaPlus,
        kappaMinus=kappaMinus,
        kappaMin=-1.0 + d.gammaT**2,
        chiOpt=optimalPhase(d.lam, d.gammaT),
        chiOptCritical=optimalPhase(d.lam, d.gammaT, lamRef=lambdaC),
        chiOptHopping=optimalPhase(d.lam, d.gammaT, d.kappaT),
        chiOptHoppingCritical=None
        if lambdaPlus is None
        else optimalPhase(d.lam, d.gammaT, d.kappaT, lamRef=lambdaPlus),
        hoppingEstimable=lambdaPlus is not None,
    )


def criticalCoupling(d: DimensionlessParams, hopping: bool = False) -> float:
    """
    Coupling at which the normal phase ends.

    Without hopping this is lambda_c. With two coupled sites it is the smaller of the
    real members of (lambda_+, lambda_-), which is lambda_+ whenever lambda_+ < lambda_-.
    A mode whose modified coupling is not real never goes unstable, so when neither is
    real the normal phase is unbounded.
    """
    if not hopping:
        return math.sqrt(1.0 + d.gammaT**2)
    candidates = [
        lamStar
        for lamStar in (
            _modifiedCoupling(d.gammaT, 1.0 + d.kappaT),
            _modifiedCoupling(d.gammaT, 1.0 - d.kappaT),
        )
        if lamStar is not None
    ]
    return min(candidates) if candidates else math.inf


class PhaseRegion(enum.Enum):
    NORMAL = "Normal"
    CRITICAL = "Critical"
    SUPERRADIANT = "Superradiant"


def phaseRegion(
    d: DimensionlessParams,
    hopping: bool = False,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> PhaseRegion:
    """
    Classify a point against the critical coupling.

    The band of width ``epsCrit`` (relative to the critical coupling) around the
    transition is reported as critical.
    """
    lamStar = criticalCoupling(d, hopping)
    if math.isinf(lamStar):
        return PhaseRegion.NORMAL
    band = epsCrit * lamStar
    if d.lam < lamStar - band:
        return PhaseRegion.NORMAL
    if abs(d.lam - lamStar) <= band:
        return PhaseRegion.CRITICAL
    return PhaseRegion.SUPERRADIANT


def requireNormal(
    d: DimensionlessParams,
    hopping: bool = False,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> None:
    """Raise :py:class:`CriticalDivergence` unless the point is in the normal phase."""
    region = phaseRegion(d, hopping, epsCrit)
    if region is not PhaseRegion.NORMAL:
        raise CriticalDivergence(
            f"lambda={d.lam:.12g} is {region.value.lower()} "
            f"(critical coupling {criticalCoupling(d, hopping):.12g}); "
            "closed forms diverge there"
        )
