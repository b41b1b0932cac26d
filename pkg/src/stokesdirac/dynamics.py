"""Quadratic Hamiltonians and implicit-midpoint integration of port-Hamiltonian systems.

A system is a structure map (canonical or reduced), a quadratic Hamiltonian
and a boundary drive.  States evolve by ``dz/dt = -M e`` where ``e`` is the
effort vector (gradient of H in the pairing representation together with
the boundary efforts).  Boundary cells are either driven by a prescribed
effort signal or fixed, in which case the effort is the multiplier that
keeps the boundary flow at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import signs
from .dec_ops import (
    Cochain,
    LinearMap,
    dual_space,
    exterior_derivative,
    hodge_star,
    pairing_sign,
    primal_boundary_space,
    primal_space,
)
from .dirac import StructureMaps, canonical_sharp_map
from .errors import IntegratorError, InvalidArgument
from .mesh import ComplexSkeleton
from .reduction import gauge_action, quotient_map, reduced_sharp

VARIANTS = ("canonical", "reduced")


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """``H = 1/2 <A rho_bar, rho_bar> + 1/2 <B pi, pi>`` with diagonal A, B > 0."""

    A: LinearMap
    B: LinearMap

    def __post_init__(self):
        for name, m in (("A", self.A), ("B", self.B)):
            if m.domain != m.codomain:
                raise InvalidArgument(f"{name} must map a space to itself")
            dense = m.matrix
            if abs(dense - dense.T).max() if dense.nnz else 0.0:
                raise InvalidArgument(f"{name} is not symmetric")

    def energy(self, rho_bar: Cochain, pi: Cochain) -> float:
        a, b = self.gradient(rho_bar, pi)
        return 0.5 * float(np.dot(a.values, rho_bar.values)) + 0.5 * float(np.dot(b.values, pi.values))

    def gradient(self, rho_bar: Cochain, pi: Cochain) -> tuple[Cochain, Cochain]:
        if rho_bar.space != self.A.domain or pi.space != self.B.domain:
            raise InvalidArgument(
                f"state on ({rho_bar.space}, {pi.space}), Hamiltonian on ({self.A.domain}, {self.B.domain})"
            )
        return self.A(rho_bar), self.B(pi)


def string_hamiltonian(c: ComplexSkeleton, k: int, T: float, mu: float) -> QuadraticHamiltonian:
    """Elastic energy ``T * star`` on exact (k+1)-cochains, kinetic ``star^-1 / mu`` on momenta."""
    n = c.dimension
    signs.check_nk(n, k)
    if not (T > 0 and mu > 0):
        raise InvalidArgument(f"T and mu must be positive, got T={T}, mu={mu}")
    sa = hodge_star(c, k + 1).matrix.diagonal()
    sb = hodge_star(c, k).matrix.diagonal()
    rho_bar, pi = primal_space(c, k + 1), dual_space(c, n - k)
    return QuadraticHamiltonian(
        LinearMap(rho_bar, rho_bar, sp.diags(T * sa, format="csr")),
        LinearMap(pi, pi, sp.diags(1.0 / (mu * sb), format="csr")),
    )


# boundary drive

Signal = Callable[[float], float]


@dataclass(frozen=True)
class BoundaryDrive:
    """Per dual-boundary cell: a prescribed effort signal, or ``None`` for a fixed cell."""

    signals: tuple

    @property
    def fixed(self) -> np.ndarray:
        return np.array([s is None for s in self.signals], dtype=bool)

    def driven_values(self, t: float) -> np.ndarray:
        return np.array([0.0 if s is None else float(s(t)) for s in self.signals])

    @classmethod
    def closed(cls, cells: int) -> "BoundaryDrive":
        return cls(tuple(zero_signal for _ in range(cells)))

    @classmethod
    def all_fixed(cls, cells: int) -> "BoundaryDrive":
        return cls((None,) * cells)


def zero_signal(t: float) -> float:
    return 0.0


# linear model


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``dz/dt = L z + G e_b``; boundary flow ``y = Y z``; power ``P_b = w * e_b . y``."""

    L: sp.csr_matrix
    G: sp.csr_matrix
    Y: sp.csr_matrix
    hessian: sp.csr_matrix
    effort: sp.csr_matrix
    power_weight: float
    split: int

    def energy(self, z: np.ndarray) -> float:
        return 0.5 * float(z @ (self.hessian @ z))


def _linear_model(structure: StructureMaps, hessians: tuple) -> LinearModel:
    rows = structure.row_names
    if len(rows) != 3:
        raise InvalidArgument(f"{structure.name} must have configuration, momentum and boundary rows")
    cfg, mom, bnd = rows
    e_cfg, e_mom = structure.pairing[cfg][0], structure.pairing[mom][0]
    e_b, mult_b = structure.pairing[bnd]
    s_cfg = pairing_sign(structure.col_space(e_cfg), structure.row_space(cfg))
    s_mom = pairing_sign(structure.col_space(e_mom), structure.row_space(mom))
    effort = sp.block_diag((s_cfg * hessians[0], s_mom * hessians[1]), format="csr")
    m_int = sp.bmat([[structure.block(r, c).matrix for c in (e_cfg, e_mom)] for r in (cfg, mom)], format="csr")
    m_b = sp.vstack([structure.block(r, e_b).matrix for r in (cfg, mom)], format="csr")
    m_out = sp.hstack([structure.block(bnd, c).matrix for c in (e_cfg, e_mom)], format="csr")
    if structure.block(bnd, e_b).matrix.nnz:
        raise InvalidArgument("boundary rows depending on boundary efforts are not supported")
    weight = mult_b * pairing_sign(structure.col_space(e_b), structure.row_space(bnd))
    return LinearModel(
        L=-(m_int @ effort).tocsr(),
        G=-m_b,
        Y=(m_out @ effort).tocsr(),
        hessian=sp.block_diag(hessians, format="csr"),
        effort=effort,
        power_weight=float(weight),
        split=hessians[0].shape[0],
    )


@dataclass
class _Stepper:
    """Factorized midpoint system for one (model, fixed set, dt)."""

    lu: object
    n: int
    m: int


@dataclass(frozen=True, eq=False)
class PHSystem:
    variant: str
    complex: ComplexSkeleton
    k: int
    structure: StructureMaps
    hamiltonian: QuadraticHamiltonian
    boundary: BoundaryDrive
    config: Cochain
    pi: Cochain
    t: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidArgument(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        want = self.structure.row_space(self.structure.row_names[0])
        if self.config.space != want or self.pi.space != self.hamiltonian.B.domain:
            raise InvalidArgument(f"state spaces ({self.config.space}, {self.pi.space}) do not match {self.structure.name}")
        cells = self.structure.col_space(self.structure.pairing[self.structure.row_names[2]][0]).dimension
        if len(self.boundary.signals) != cells:
            raise InvalidArgument(f"boundary drive has {len(self.boundary.signals)} cells, structure has {cells}")

    @property
    def model(self) -> LinearModel:
        if "model" not in self._cache:
            a = self.hamiltonian.A.matrix
            if self.variant == "canonical":
                d = exterior_derivative(self.complex, self.k).matrix
                hess = ((d.T @ a) @ d).tocsr()
            else:
                hess = a
            self._cache["model"] = _linear_model(self.structure, (hess, self.hamiltonian.B.matrix))
        return self._cache["model"]

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.config.values, self.pi.values])

    def with_state(self, z: np.ndarray, t: float) -> "PHSystem":
        s = self.model.split
        return replace(self, config=Cochain(self.config.space, z[:s]), pi=Cochain(self.pi.space, z[s:]), t=t,
                       _cache=self._cache)

    def reduced_config(self) -> Cochain:
        if self.variant == "reduced":
            return self.config
        return exterior_derivative(self.complex, self.k)(self.config)

    def energy(self) -> float:
        return self.hamiltonian.energy(self.reduced_config(), self.pi)

    def efforts(self) -> np.ndarray:
        """Interior efforts in the pairing representation."""
        return self.model.effort @ self.state

    def _stepper(self, dt: float) -> _Stepper:
        key = ("step", float(dt))
        if key not in self._cache:
            m = self.model
            fixed = self.boundary.fixed
            n = m.L.shape[0]
            eye = sp.identity(n, format="csr")
            gf = m.G[:, fixed]
            c = m.Y[fixed]
            k = int(fixed.sum())
            mat = eye - 0.5 * dt * m.L
            if k:
                mat = sp.bmat([[mat, -dt * gf], [c, None]])
            try:
                lu = spla.splu(sp.csc_matrix(mat))
            except RuntimeError as exc:
                raise IntegratorError(f"singular midpoint system at dt={dt}: {exc}") from exc
            self._cache[key] = _Stepper(lu, n, k)
        return self._cache[key]

    def boundary_effort(self, t: float, multipliers: np.ndarray | None = None) -> np.ndarray:
        e = self.boundary.driven_values(t)
        if multipliers is not None:
            e[self.boundary.fixed] = multipliers
        return e

    def boundary_flow(self, z: np.ndarray) -> np.ndarray:
        return self.model.Y @ z

    def step(self, dt: float) -> tuple["PHSystem", float]:
        """One implicit-midpoint step; returns the new system and the midpoint boundary power."""
        if not dt > 0:
            raise InvalidArgument(f"dt must be positive, got {dt}")
        m = self.model
        st = self._stepper(dt)
        z = self.state
        tm = self.t + 0.5 * dt
        drive = self.boundary.driven_values(tm)
        rhs = z + 0.5 * dt * (m.L @ z) + dt * (m.G @ drive)
        if st.m:
            rhs = np.concatenate([rhs, -(m.Y[self.boundary.fixed] @ z)])
        sol = st.lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise IntegratorError(f"non-finite state after step at t={self.t}")
        z_new = sol[: st.n]
        e_b = self.boundary_effort(tm, sol[st.n:] if st.m else None)
        y_mid = m.Y @ (0.5 * (z + z_new))
        power = m.power_weight * float(np.dot(e_b, y_mid))
        return self.with_state(z_new, self.t + dt), power


def step_canonical(sys: PHSystem, dt: float) -> PHSystem:
    if sys.variant != "canonical":
        raise InvalidArgument("step_canonical needs a canonical system")
    return sys.step(dt)[0]


def step_reduced(sys: PHSystem, dt: float) -> PHSystem:
    if sys.variant != "reduced":
        raise InvalidArgument("step_reduced needs a reduced system")
    return sys.step(dt)[0]


def make_system(c: ComplexSkeleton, k: int, variant: str, hamiltonian: QuadraticHamiltonian,
                boundary: BoundaryDrive | None, rho: Cochain, pi: Cochain) -> PHSystem:
    """Build a system from a configuration potential ``rho`` (a k-cochain) and momenta.

    The reduced variant starts from the quotient of the canonical state.
    """
    n = c.dimension
    if variant == "canonical":
        structure = canonical_sharp_map(c, k)
        config = rho
    elif variant == "reduced":
        structure = reduced_sharp(c, k)
        config = exterior_derivative(c, k)(rho)
    else:
        raise InvalidArgument(f"variant must be one of {VARIANTS}, got {variant!r}")
    if boundary is None:
        boundary = BoundaryDrive.closed(c.boundary_count(k))
    if rho.space != primal_space(c, k) or pi.space != dual_space(c, n - k):
        raise InvalidArgument("initial state must be a primal k-cochain and an interior-dual (n-k)-cochain")
    return PHSystem(variant, c, k, structure, hamiltonian, boundary, config, pi)


def to_reduced(sys: PHSystem) -> PHSystem:
    """The reduced system started from the quotient of a canonical system's state."""
    if sys.variant != "canonical":
        raise InvalidArgument("to_reduced needs a canonical system")
    c, k = sys.complex, sys.k
    rs = quotient_map(c, k, sys.config, sys.pi, primal_boundary_space(c, k).zeros())
    return PHSystem("reduced", c, k, reduced_sharp(c, k), sys.hamiltonian, sys.boundary, rs.rho_bar, rs.pi, sys.t)


# simulation


@dataclass
class SimulationRecord:
    times: np.ndarray
    H: np.ndarray
    P_b: np.ndarray
    E_b: np.ndarray
    snapshots: list
    final: PHSystem

    @property
    def balance_residual(self) -> np.ndarray:
        return np.abs(self.H - self.H[0] - self.E_b)

    def max_balance_residual(self) -> float:
        return float(np.max(self.balance_residual))

    def balance_threshold(self) -> float:
        return max(1.0, float(np.max(self.H)))


def simulate(sys: PHSystem, t_end: float, dt: float, snapshot_every: int = 0,
             on_step: Callable[[PHSystem], None] | None = None) -> SimulationRecord:
    """Integrate ``round(t_end / dt)`` steps.

    ``P_b[i]`` is the boundary power at the midpoint of step i (``P_b[0]`` is
    zero), and ``E_b`` is the running sum of ``dt * P_b``.
    """
    if not (t_end > 0 and dt > 0):
        raise InvalidArgument(f"t_end and dt must be positive, got t_end={t_end}, dt={dt}")
    steps = int(round(t_end / dt))
    if steps < 1:
        raise InvalidArgument(f"t_end={t_end} is shorter than one step of {dt}")
    times = np.empty(steps + 1)
    H = np.empty(steps + 1)
    P = np.zeros(steps + 1)
    E = np.zeros(steps + 1)
    snaps = []
    t0 = sys.t
    times[0], H[0] = t0, sys.energy()
    if snapshot_every:
        snaps.append(_snapshot(sys))
    for i in range(1, steps + 1):
        sys, power = sys.step(dt)
        # fixed grid: avoid accumulating dt round-off in t
        sys = replace(sys, t=t0 + i * dt, _cache=sys._cache)
        times[i] = sys.t
        H[i] = sys.energy()
        P[i] = power
        E[i] = E[i - 1] + dt * power
        if snapshot_every and i % snapshot_every == 0:
            snaps.append(_snapshot(sys))
        if on_step is not None:
            on_step(sys)
    return SimulationRecord(times, H, P, E, snaps, sys)


def _snapshot(sys: PHSystem) -> dict:
    return {"t": sys.t, "config": sys.config.values.tolist(), "pi": sys.pi.values.tolist()}


def trajectory(sys: PHSystem, dt: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced configurations and momenta at every step, rows indexed by step."""
    cfg = [sys.reduced_config().values]
    pis = [sys.pi.values]
    for _ in range(steps):
        sys, _ = sys.step(dt)
        cfg.append(sys.reduced_config().values)
        pis.append(sys.pi.values)
    return np.array(cfg), np.array(pis)


# spectrum


def constrained_system_matrix(sys: PHSystem) -> np.ndarray:
    """Dense generator of the unforced flow restricted to the fixed-boundary constraint set."""
    m = sys.model
    L = m.L.toarray()
    fixed = sys.boundary.fixed
    if not fixed.any():
        return L
    C = m.Y[fixed].toarray()
    G = m.G[:, fixed].toarray()
    proj = np.eye(L.shape[0]) - G @ np.linalg.solve(C @ G, C)
    Q = sla.null_space(C)
    return Q.T @ proj @ L @ Q


def fundamental_frequency(sys: PHSystem, zero_tol: float = 1e-8) -> float:
    """Smallest nonzero angular frequency of the constrained unforced flow."""
    lam = np.linalg.eigvals(constrained_system_matrix(sys))
    scale = max(1.0, float(np.max(np.abs(lam))))
    om = np.abs(lam.imag)
    om = om[om > zero_tol * scale]
    if om.size == 0:
        raise InvalidArgument("the constrained system has no oscillatory modes")
    return float(np.min(om))


# gauge symmetry


@dataclass
class ComparisonReport:
    hamiltonian_change: float
    pi_distance: float
    projected_distance: float
    reduced_distance: float | None = None

    def passed(self, h_tol: float = 1e-12, traj_tol: float = 1e-10, reduced_tol: float = 1e-9) -> bool:
        ok = self.hamiltonian_change < h_tol and self.pi_distance < traj_tol and self.projected_distance < traj_tol
        if self.reduced_distance is not None:
            ok = ok and self.reduced_distance < reduced_tol
        return ok

    def to_dict(self) -> dict:
        return {
            "hamiltonian_change": self.hamiltonian_change,
            "pi_distance": self.pi_distance,
            "projected_distance": self.projected_distance,
            "reduced_distance": self.reduced_distance,
        }


def gauge_shift_test(sys: PHSystem, alpha: Cochain, dt: float = 1e-3, steps: int = 1000,
                     compare_reduced: bool = True) -> ComparisonReport:
    """Run ``sys`` and its gauge-shifted copy side by side and compare."""
    if sys.variant != "canonical":
        raise InvalidArgument("gauge_shift_test needs a canonical system")
    g = gauge_action(sys.complex, sys.k)
    shifted = replace(sys, config=g.act(sys.config, alpha), _cache=sys._cache)
    dh = abs(shifted.energy() - sys.energy())
    cfg0, pi0 = trajectory(sys, dt, steps)
    cfg1, pi1 = trajectory(shifted, dt, steps)
    red = None
    if compare_reduced:
        cfg_r, pi_r = trajectory(to_reduced(sys), dt, steps)
        red = float(max(np.max(np.abs(cfg_r - cfg0)), np.max(np.abs(pi_r - pi0))))
    return ComparisonReport(
        hamiltonian_change=float(dh),
        pi_distance=float(np.max(np.abs(pi1 - pi0))),
        projected_distance=float(max(np.max(np.abs(cfg1 - cfg0)), np.max(np.abs(pi1 - pi0)))),
        reduced_distance=red,
    )


def cayley_step(L: np.ndarray, z: np.ndarray, dt: float) -> np.ndarray:
    """Dense Cayley transform ``(I - dt/2 L)^-1 (I + dt/2 L) z``."""
    eye = np.eye(L.shape[0])
    return np.linalg.solve(eye - 0.5 * dt * L, (eye + 0.5 * dt * L) @ z)


def analytic_fundamental_frequency(T: float, mu: float, length: float) -> float:
    return math.pi * math.sqrt(T / mu) / length
