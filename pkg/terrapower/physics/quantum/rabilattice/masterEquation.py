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
Lindblad master-equation engine for the Rabi lattice in a truncated Fock (x spin) space.

Two Hamiltonians are supported. ``FullRabi`` keeps a spin on every site::

    H = sum_k [omega n_k + (Omega/2) sz_k + g sx_k (a_k + a_k^dagger)
               + (F/2)(a_k^dagger e^{i chi} + a_k e^{-i chi})]
        + kappa sum_k (a_k^dagger a_{k+1} + a_{k+1}^dagger a_k)

``EffectiveQuadratic`` eliminates the spins in their ground state, replacing the spin
terms by omega(1 - lambda^2/2) n_k - (omega lambda^2/4)(a_k^2 + a_k^dagger^2).

Every boson decays as gamma_k (2 a rho a^dagger - {a^dagger a, rho}), which is the
standard Lindblad dissipator of the collapse operator sqrt(2 gamma_k) a. Operators,
superoperators and solvers come from QuTiP. Factors are ordered site-major with the
spin of a site before its boson; spins use (up, down), so spin-down is ``basis(2, 1)``.
"""
import enum
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
import qutip
from qutip.solver.integrator import IntegratorException

from armi import runLog

from .dynamics import momentFlowFromModel, spectralAbscissa
from .errors import (
    ConfigurationError,
    FiniteDifferenceMismatch,
    InvalidCutoffError,
    NoConvergence,
    NonUniqueSteadyState,
    NumericalFailure,
    PhaseUnidentifiable,
    SuperoperatorBudgetError,
    TruncationError,
)
from .metrology import Basis, QfimResult, qfimFromSlds, sldFromDerivative
from .params import ModelParams

SPIN = "spin"
BOSON = "boson"

MIN_CUTOFF = 4
DEFAULT_MAX_SUPEROPERATOR_DIM = 4_000_000
DEFAULT_TAIL_GUARD = 1e-8
DEFAULT_MOMENT_TOLERANCE = 1e-8
HORIZON_DECAY_TIMES = 12.0
DUMP_DTYPE = "<c16"
HEADER_DTYPE = "<i8"


class ModelKind(enum.Enum):
    FULL_RABI = "FullRabi"
    EFFECTIVE_QUADRATIC = "EffectiveQuadratic"


class SteadyMethod(enum.Enum):
    AUTO = "Auto"
    NULL_SPACE = "NullSpace"
    TIME_EVOLVE = "TimeEvolve"


class SolverOptions(NamedTuple):
    """
    Controls for the steady-state solvers.

    ``evolveTime`` of zero means twelve of the slowest decay times of the moment flow.
    ``strict`` turns convergence and density-matrix warnings into errors.
    ``tolMoments`` is the largest change of the quadrature moments allowed when the Fock
    cutoffs are doubled.
    """

    method: SteadyMethod = SteadyMethod.AUTO
    tolSteady: float = 1e-10
    evolveTime: float = 0.0
    strict: bool = False
    nullSpaceMaxDim: int = 70
    tailGuard: float = DEFAULT_TAIL_GUARD
    tolMoments: float = DEFAULT_MOMENT_TOLERANCE
    maxSuperoperatorDim: int = DEFAULT_MAX_SUPEROPERATOR_DIM


def _embed(op: qutip.Qobj, index: int, dims: Sequence[int]) -> qutip.Qobj:
    """Place a single-factor operator on factor ``index`` of a tensor-product space."""
    if op.shape != (dims[index], dims[index]):
        raise ValueError(
            f"Operator of shape {op.shape} does not fit factor {index} of dimension {dims[index]}"
        )
    return qutip.tensor([op if k == index else qutip.qeye(dim) for k, dim in enumerate(dims)])


class DensityMatrix:
    """
    A density matrix on a tensor product of spin and truncated boson factors.

    Parameters
    ----------
    state : Qobj or ndarray
        Square matrix of dimension ``prod(dims)``.
    dims : list of int
        Dimension of every factor.
    kinds : list of str
        :py:data:`SPIN` or :py:data:`BOSON` for every factor.
    """

    def __init__(self, state, dims: Sequence[int], kinds: Optional[Sequence[str]] = None):
        self.dims = [int(dim) for dim in dims]
        if kinds is None:
            # boson cutoffs are at least MIN_CUTOFF, so a two-level factor is a spin
            kinds = [SPIN if dim == 2 else BOSON for dim in self.dims]
        self.kinds = list(kinds)
        data = state.full() if isinstance(state, qutip.Qobj) else np.asarray(state, dtype=complex)
        size = int(np.prod(self.dims))
        if data.shape != (size, size):
            raise ValueError(
                f"Density matrix of shape {data.shape} does not match dims {self.dims}"
            )
        self.qobj = qutip.Qobj(data, dims=[self.dims, self.dims])

    def __repr__(self):
        return f"<DensityMatrix dims={self.dims}>"

    @property
    def data(self) -> np.ndarray:
        """Dense copy of the matrix."""
        return self.qobj.full()

    @property
    def trace(self) -> complex:
        return complex(self.qobj.tr())

    def minEigenvalue(self) -> float:
        return float((0.5 * (self.qobj + self.qobj.dag())).eigenenergies()[0])

    def partialTrace(self, keep: Sequence[int]) -> "DensityMatrix":
        """Reduce to the factors listed in ``keep``."""
        keep = sorted(keep)
        return DensityMatrix(
            self.qobj.ptrace(keep), [self.dims[k] for k in keep], [self.kinds[k] for k in keep]
        )

    @property
    def bosonFactors(self) -> List[int]:
        return [k for k, kind in enumerate(self.kinds) if kind == BOSON]

    @property
    def spinFactors(self) -> List[int]:
        return [k for k, kind in enumerate(self.kinds) if kind == SPIN]

    def bosonState(self) -> "DensityMatrix":
        """Partial trace over every spin."""
        if not self.spinFactors:
            return self
        return self.partialTrace(self.bosonFactors)

    def tailMass(self) -> float:
        """Largest population of the top two Fock levels over all boson factors."""
        tail = 0.0
        for factor in self.bosonFactors:
            populations = np.real(self.qobj.ptrace(factor).diag())
            tail = max(tail, float(populations[-2:].sum()))
        return tail

    def isTruncationSafe(self, guard: float = DEFAULT_TAIL_GUARD) -> bool:
        return self.tailMass() < guard

    def problems(self, tolHermitian=1e-12, tolTrace=1e-10, tolEigenvalue=1e-8) -> List[str]:
        """Describe every violated density-matrix property."""
        issues = []
        data = self.data
        scale = max(1.0, np.abs(data).max())
        asymmetry = np.abs(data - data.conj().T).max()
        if asymmetry > tolHermitian * scale:
            issues.append(f"not Hermitian (deviation {asymmetry:.3e})")
        if abs(self.trace - 1.0) > tolTrace:
            issues.append(f"trace {self.trace:.12g} differs from one")
        lowest = self.minEigenvalue()
        if lowest < -tolEigenvalue:
            issues.append(f"negative eigenvalue {lowest:.3e}")
        return issues

    def dump(self, path: str):
        """
        Write the binary dump: int64 factor count, int64 dims, then the matrix as
        little-endian complex128 in row-major order.
        """
        with open(path, "wb") as stream:
            np.asarray([len(self.dims)] + self.dims, dtype=HEADER_DTYPE).tofile(stream)
            np.ascontiguousarray(self.data, dtype=DUMP_DTYPE).tofile(stream)

    @classmethod
    def load(cls, path: str) -> "DensityMatrix":
        with open(path, "rb") as stream:
            nFactors = int(np.fromfile(stream, dtype=HEADER_DTYPE, count=1)[0])
            dims = [int(dim) for dim in np.fromfile(stream, dtype=HEADER_DTYPE, count=nFactors)]
            size = int(np.prod(dims))
            data = np.fromfile(stream, dtype=DUMP_DTYPE, count=size * size)
        return cls(data.reshape(size, size), dims)


class Moments(NamedTuple):
    """Steady moments read from a density matrix: quadrature mean, covariance and <sz> per spin."""

    mean: np.ndarray
    cov: np.ndarray
    spinZ: np.ndarray

    @property
    def nModes(self) -> int:
        return len(self.mean) // 2

    def dump(self, path: str):
        """int64 mode count and spin count, then mean, covariance and <sz> as little-endian float64."""
        with open(path, "wb") as stream:
            np.asarray([self.nModes, len(self.spinZ)], dtype=HEADER_DTYPE).tofile(stream)
            for block in (self.mean, self.cov, self.spinZ):
                np.ascontiguousarray(block, dtype="<f8").tofile(stream)

    @classmethod
    def load(cls, path: str) -> "Moments":
        with open(path, "rb") as stream:
            nModes, nSpins = (int(v) for v in np.fromfile(stream, dtype=HEADER_DTYPE, count=2))
            mean = np.fromfile(stream, dtype="<f8", count=2 * nModes)
            cov = np.fromfile(stream, dtype="<f8", count=4 * nModes * nModes)
            spinZ = np.fromfile(stream, dtype="<f8", count=nSpins)
        return cls(mean, cov.reshape(2 * nModes, 2 * nModes), spinZ)


class Liouvillian:
    """QuTiP superoperator of the lattice master equation and the model it came from."""

    def __init__(self, superop: qutip.Qobj, hamiltonian: qutip.Qobj, dims, kinds, model, params):
        self.superop = superop
        self.hamiltonian = hamiltonian
        self.dims = list(dims)
        self.kinds = list(kinds)
        self.model = ModelKind(model)
        self.params = params

    def __repr__(self):
        return f"<Liouvillian {self.model.value} dims={self.dims}>"

    @property
    def hilbertDim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def dim(self) -> int:
        return self.hilbertDim**2

    def _asQobj(self, rho) -> qutip.Qobj:
        if isinstance(rho, DensityMatrix):
            return rho.qobj
        if isinstance(rho, qutip.Qobj):
            return rho
        return qutip.Qobj(np.asarray(rho, dtype=complex), dims=[self.dims, self.dims])

    def apply(self, rho) -> qutip.Qobj:
        """d(rho)/dt for a density matrix, Qobj or array."""
        return qutip.vector_to_operator(self.superop * qutip.operator_to_vector(self._asQobj(rho)))

    def traceLeak(self) -> float:
        """Largest entry of the trace functional applied to the superoperator."""
        functional = qutip.operator_to_vector(qutip.qeye(self.dims)).dag()
        return float(np.abs((functional * self.superop).full()).max())

    def hermiticityLeak(self, samples: int = 3, seed: int = 0) -> float:
        """Largest anti-Hermitian part produced from random Hermitian inputs."""
        rng = np.random.default_rng(seed)
        shape = (self.hilbertDim,) * 2
        worst = 0.0
        for _sample in range(samples):
            raw = rng.normal(size=shape) + 1j * rng.normal(size=shape)
            image = self.apply(raw + raw.conj().T).full()
            worst = max(worst, np.abs(image - image.conj().T).max() / max(np.abs(image).max(), 1.0))
        return float(worst)

    def residual(self, rho) -> float:
        """Frobenius norm of d(rho)/dt."""
        return float(self.apply(rho).norm("fro"))


def _normalizeCutoffs(cutoffs: Union[int, Sequence[int]], nSites: int) -> List[int]:
    if isinstance(cutoffs, (int, np.integer)):
        cutoffs = [int(cutoffs)] * nSites
    cutoffs = [int(c) for c in cutoffs]
    if len(cutoffs) != nSites:
        raise InvalidCutoffError(f"Expected {nSites} cutoffs, got {len(cutoffs)}")
    if min(cutoffs) < MIN_CUTOFF:
        raise InvalidCutoffError(f"Fock cutoffs must be at least {MIN_CUTOFF}, got {cutoffs}")
    return cutoffs


def _factorLayout(p: ModelParams, cutoffs, model: ModelKind):
    dims, kinds = [], []
    for cutoff in _normalizeCutoffs(cutoffs, p.nSites):
        if ModelKind(model) is ModelKind.FULL_RABI:
            dims.append(2)
            kinds.append(SPIN)
        dims.append(cutoff)
        kinds.append(BOSON)
    return dims, kinds


def buildLiouvillian(
    p: ModelParams,
    cutoffs: Union[int, Sequence[int]],
    model: ModelKind = ModelKind.EFFECTIVE_QUADRATIC,
    maxSuperoperatorDim: int = DEFAULT_MAX_SUPEROPERATOR_DIM,
) -> Liouvillian:
    """Assemble the Liouvillian of the lattice in the requested model."""
    model = ModelKind(model)
    dims, kinds = _factorLayout(p, cutoffs, model)
    bosonIndex = [k for k, kind in enumerate(kinds) if kind == BOSON]
    spinIndex = [k for k, kind in enumerate(kinds) if kind == SPIN]

    hilbertDim = int(np.prod(dims))
    if hilbertDim**2 > maxSuperoperatorDim:
        raise SuperoperatorBudgetError(
            f"Superoperator dimension {hilbertDim**2} exceeds the budget {maxSuperoperatorDim}"
        )

    lowering = [_embed(qutip.destroy(dims[k]), k, dims) for k in bosonIndex]
    drivePhase = np.exp(1j * p.chi)
    lam2 = 4.0 * p.g**2 / (p.omega * p.Omega)

    hamiltonian = qutip.qzero(dims)
    for site, a in enumerate(lowering):
        ad = a.dag()
        hamiltonian += 0.5 * p.F * (drivePhase * ad + np.conj(drivePhase) * a)
        if model is ModelKind.FULL_RABI:
            sz = _embed(qutip.sigmaz(), spinIndex[site], dims)
            sx = _embed(qutip.sigmax(), spinIndex[site], dims)
            hamiltonian += p.omega * ad * a + 0.5 * p.Omega * sz + p.g * sx * (a + ad)
        else:
            hamiltonian += (
                p.omega * (1.0 - 0.5 * lam2) * ad * a - 0.25 * p.omega * lam2 * (a * a + ad * ad)
            )
    for site in range(p.nSites - 1):
        hop = lowering[site].dag() * lowering[site + 1]
        hamiltonian += p.kappa * (hop + hop.dag())

    collapse = [np.sqrt(2.0 * decay) * a for decay, a in zip(p.gamma, lowering) if decay > 0.0]
    superop = qutip.liouvillian(hamiltonian, collapse)
    runLog.debug(f"Built {model.value} Liouvillian with dims {dims} and {len(collapse)} collapse ops")
    return Liouvillian(superop, hamiltonian, dims, kinds, model, p)


def _initialState(liou: Liouvillian) -> qutip.Qobj:
    """Every spin down and every boson in its vacuum."""
    return qutip.ket2dm(
        qutip.tensor(
            [qutip.basis(dim, 1 if kind == SPIN else 0) for dim, kind in zip(liou.dims, liou.kinds)]
        )
    )


def evolutionHorizon(p: ModelParams) -> float:
    """Twelve of the slowest decay times of the quadratic moment flow."""
    abscissa = spectralAbscissa(momentFlowFromModel(p).drift)
    if abscissa >= 0.0:
        slowest = min((gk for gk in p.gamma if gk > 0.0), default=0.0)
        if slowest == 0.0:
            raise NoConvergence("Without decay the master equation has no attracting steady state")
        return HORIZON_DECAY_TIMES / slowest
    return HORIZON_DECAY_TIMES / (abs(abscissa) * p.omega)


def _solveNullSpace(liou: Liouvillian) -> qutip.Qobj:
    try:
        rho = qutip.steadystate(liou.superop, method="direct")
    except (RuntimeError, ValueError, np.linalg.LinAlgError) as err:
        raise NonUniqueSteadyState(f"Liouvillian null space is degenerate: {err}") from err
    if not np.all(np.isfinite(rho.full())):
        raise NonUniqueSteadyState("Steady-state solve produced non-finite values")
    return rho


def _solveTimeEvolve(liou: Liouvillian, options: SolverOptions, chunks: int = 20) -> qutip.Qobj:
    horizon = options.evolveTime if options.evolveTime > 0.0 else evolutionHorizon(liou.params)
    window = horizon / chunks
    solverOptions = {"atol": 1e-12, "rtol": 1e-8, "nsteps": 100_000}

    state = _initialState(liou)
    elapsed = 0.0
    residual = liou.residual(state)
    while elapsed < horizon * (1.0 - 1e-12):
        try:
            result = qutip.mesolve(
                liou.superop, state, [elapsed, elapsed + window], options=solverOptions
            )
        except IntegratorException as err:
            raise NoConvergence(f"Time integration failed: {err}") from err
        state = result.states[-1]
        elapsed += window
        residual = liou.residual(state)
        runLog.debug(f"t = {elapsed:.4g}: steady residual {residual:.3e}")
        if residual < options.tolSteady:
            break
    else:
        message = (
            f"Time evolution reached t = {horizon:.4g} with residual {residual:.3e} "
            f"above {options.tolSteady:.1e}"
        )
        if options.strict:
            raise NoConvergence(message)
        runLog.warning(message)
    return state


def checkDensityMatrix(rho: DensityMatrix, options: SolverOptions, origin: str = "") -> List[str]:
    """Warn about every density-matrix problem, or raise under strict options."""
    issues = rho.problems()
    if issues:
        message = f"Steady state {origin}: " + "; ".join(issues)
        if options.strict:
            raise NumericalFailure(message)
        runLog.warning(message)
    return issues


def steadyState(liou: Liouvillian, options: Optional[SolverOptions] = None) -> DensityMatrix:
    """
    Steady state of a Liouvillian.

    ``NullSpace`` solves L(rho) = 0 with QuTiP's direct sparse solver. ``TimeEvolve``
    integrates with ``mesolve`` from the all-spins-down vacuum until ||d rho/dt|| drops
    below the tolerance or the horizon is reached. ``Auto`` time-evolves the full Rabi
    model, where the strict steady state mixes both spin sectors on a very slow time
    scale, and uses the null space for small quadratic models.
    """
    options = options or SolverOptions()
    method = SteadyMethod(options.method)
    if method is SteadyMethod.AUTO:
        if liou.model is ModelKind.FULL_RABI or liou.hilbertDim > options.nullSpaceMaxDim:
            method = SteadyMethod.TIME_EVOLVE
        else:
            method = SteadyMethod.NULL_SPACE
    runLog.extra(f"Solving {liou} for its steady state with {method.value}")

    if method is SteadyMethod.NULL_SPACE:
        state = _solveNullSpace(liou)
    else:
        state = _solveTimeEvolve(liou, options)

    state = 0.5 * (state + state.dag())
    rho = DensityMatrix(state / state.tr().real, liou.dims, liou.kinds)
    checkDensityMatrix(rho, options, f"of {liou}")
    return rho


def momentChange(first: Moments, second: Moments) -> float:
    """Largest absolute change of the quadrature mean and covariance entries."""
    return float(
        max(np.abs(first.mean - second.mean).max(), np.abs(first.cov - second.cov).max())
    )


def convergedSteadyState(
    p: ModelParams,
    cutoffs: Union[int, Sequence[int]],
    model: ModelKind = ModelKind.EFFECTIVE_QUADRATIC,
    options: Optional[SolverOptions] = None,
    maxDoublings: int = 3,
) -> DensityMatrix:
    """
    Solve, doubling the Fock cutoffs until the state is converged.

    A state is accepted once its Fock tail mass is below the guard and doubling the
    cutoffs once more moves no quadrature moment by ``options.tolMoments`` or more; the
    state at the larger cutoffs is returned. When the doubled space would exceed the
    superoperator budget the state that passed the tail guard is returned with a
    warning, or rejected under strict options.
    """
    options = options or SolverOptions()
    cutoffs = _normalizeCutoffs(cutoffs, p.nSites)
    previous = None
    for doubling in range(maxDoublings + 1):
        liou = buildLiouvillian(p, cutoffs, model, options.maxSuperoperatorDim)
        rho = steadyState(liou, options)
        tail = rho.tailMass()
        if tail >= options.tailGuard:
            previous = None
            reason = f"Fock tail mass {tail:.3e} exceeds {options.tailGuard:.1e}"
        else:
            moments = expectations(rho, (MEANS, COVARIANCE))
            if previous is not None:
                change = momentChange(previous, moments)
                if change < options.tolMoments:
                    return rho
                reason = f"moments changed by {change:.3e} when the cutoffs were doubled"
            else:
                reason = "the moments are not yet confirmed at doubled cutoffs"
            previous = moments

        if doubling == maxDoublings:
            break
        doubled = [2 * c for c in cutoffs]
        doubledDim = int(np.prod(_factorLayout(p, doubled, model)[0])) ** 2
        if previous is not None and doubledDim > options.maxSuperoperatorDim:
            message = (
                f"Cannot confirm the steady state at cutoffs {cutoffs}: doubled cutoffs need a "
                f"superoperator of dimension {doubledDim} above the budget "
                f"{options.maxSuperoperatorDim}"
            )
            if options.strict:
                raise TruncationError(message)
            runLog.warning(message)
            return rho
        runLog.info(f"At cutoffs {cutoffs}, {reason}; doubling")
        cutoffs = doubled
    raise TruncationError(f"Steady state not converged at cutoffs {cutoffs}: {reason}")


MEANS = "means"
COVARIANCE = "covariance"
SPIN_Z = "spin"


def expectations(
    rho: DensityMatrix, which: Sequence[str] = (MEANS, COVARIANCE, SPIN_Z)
) -> Moments:
    """
    Quadrature moments of the bosons and <sz> of the spins.

    The covariance is the symmetrised second moment Re<R_i R_j> - d_i d_j. Quantities not
    listed in ``which`` come back as empty arrays.
    """
    unknown = set(which) - {MEANS, COVARIANCE, SPIN_Z}
    if unknown:
        raise ConfigurationError(f"Unknown observables {sorted(unknown)}")
    if len(rho.kinds) != len(rho.dims):
        raise ValueError(f"{len(rho.kinds)} factor kinds for {len(rho.dims)} factors")

    spinZ = np.array(
        [np.real(qutip.expect(_embed(qutip.sigmaz(), k, rho.dims), rho.qobj)) for k in rho.spinFactors]
        if SPIN_Z in which
        else []
    )

    bosons = rho.bosonState()
    quadratures = []
    for k, dim in enumerate(bosons.dims):
        a = _embed(qutip.destroy(dim), k, bosons.dims)
        quadratures.append(a + a.dag())
        quadratures.append(1j * (a.dag() - a))

    mean = np.array([np.real(qutip.expect(op, bosons.qobj)) for op in quadratures])
    if COVARIANCE in which:
        size = len(quadratures)
        cov = np.empty((size, size))
        for i, left in enumerate(quadratures):
            for j in range(i, size):
                right = quadratures[j]
                second = np.real(qutip.expect(0.5 * (left * right + right * left), bosons.qobj))
                cov[i, j] = cov[j, i] = second - mean[i] * mean[j]
    else:
        cov = np.empty((0, 0))
    if MEANS not in which:
        mean = np.empty(0)
    return Moments(mean, cov, spinZ)


def numericQfimExact(
    p: ModelParams,
    cutoffs: Union[int, Sequence[int]],
    model: ModelKind = ModelKind.EFFECTIVE_QUADRATIC,
    step: float = 1e-4,
    options: Optional[SolverOptions] = None,
    tolEig: float = 1e-12,
    rtol: float = 1e-4,
) -> QfimResult:
    """
    (F, chi) QFIM from exact steady states.

    The state derivatives are central differences with steps h and h/2 combined by
    Richardson extrapolation; a relative disagreement above ten times ``rtol`` aborts.
    SLDs are solved in the eigenbasis of the steady state.
    """
    options = options or SolverOptions()
    forceT = p.F / p.omega
    forceStep = step * max(forceT, 1.0)
    if forceT <= forceStep:
        raise PhaseUnidentifiable(
            f"Reduced force {forceT} is too small for a central difference of step {forceStep}"
        )

    def stateAt(force, chi):
        liou = buildLiouvillian(
            p.withChanges(F=force * p.omega, chi=chi), cutoffs, model, options.maxSuperoperatorDim
        )
        return steadyState(liou, options).data

    center = DensityMatrix(stateAt(forceT, p.chi), *_factorLayout(p, cutoffs, model))
    if not center.isTruncationSafe(options.tailGuard):
        raise TruncationError(
            f"Steady state at cutoffs {cutoffs} has Fock tail mass {center.tailMass():.3e}"
        )

    def centralDifference(shift, h):
        return (stateAt(*shift(h)) - stateAt(*shift(-h))) / (2.0 * h)

    derivatives = []
    for name, h, shift in (
        ("F", forceStep, lambda h: (forceT + h, p.chi)),
        ("chi", step, lambda h: (forceT, p.chi + h)),
    ):
        coarse = centralDifference(shift, h)
        fine = centralDifference(shift, 0.5 * h)
        mismatch = np.linalg.norm(coarse - fine) / max(np.linalg.norm(fine), 1e-300)
        if mismatch > 10.0 * rtol:
            raise FiniteDifferenceMismatch(
                f"d rho/d{name} changes by {mismatch:.3e} (relative) when the step is halved"
            )
        derivatives.append((4.0 * fine - coarse) / 3.0)

    centerData = center.data
    slds = tuple(sldFromDerivative(centerData, drho, tolEig) for drho in derivatives)
    return qfimFromSlds(centerData, slds, forceT, p.chi, Basis.FORCE_PHASE)
