"""Scenario geometry, random channel draws and SINR evaluation.

Groups are indexed from 0 and ordered from the farthest region to the
nearest one, which is also the SIC decoding order: a user of group ``g``
decodes the messages of groups ``0..g-1`` before its own, and sees the
beams of groups ``g+1..`` as interference.  An optional extra beam (the
newly joined, nearest group) is treated as the last group in that order.

Powers are linear milliwatts throughout; beams are in sqrt(mW).
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RegionSpec:
    d_min: float
    d_max: float

    def __post_init__(self):
        if not self.d_min > 0:
            raise ValueError(f"d_min must be positive, got {self.d_min}")
        if self.d_max < self.d_min:
            raise ValueError(f"d_max={self.d_max} below d_min={self.d_min}")

    @property
    def d_ave(self):
        return 0.5 * (self.d_min + self.d_max)


@dataclass(frozen=True)
class ScenarioGeometry:
    """Regions (farthest first), users per region and link parameters."""
    regions: tuple
    users_per_region: tuple
    antennas: int = 8
    pathloss_exponent: float = 2.5
    noise_power: float = 1e-8  # mW (-80 dBm)

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "users_per_region", tuple(int(u) for u in self.users_per_region))
        if not self.regions:
            raise ValueError("at least one region is required")
        if len(self.users_per_region) != len(self.regions):
            raise ValueError("users_per_region must have one entry per region")
        if any(u < 1 for u in self.users_per_region):
            raise ValueError("every region needs at least one user")
        if self.antennas < 1:
            raise ValueError("antennas must be >= 1")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        aves = [r.d_ave for r in self.regions]
        if any(a < b for a, b in zip(aves, aves[1:])):
            raise ValueError("regions must be sorted by non-increasing average distance")

    @property
    def groups(self):
        return len(self.regions)

    def with_users(self, users):
        """Same geometry with ``users`` per region (an int or a sequence)."""
        if np.isscalar(users):
            users = (int(users),) * self.groups
        return ScenarioGeometry(self.regions, tuple(users), self.antennas,
                                self.pathloss_exponent, self.noise_power)

    def with_antennas(self, antennas):
        return ScenarioGeometry(self.regions, self.users_per_region, int(antennas),
                                self.pathloss_exponent, self.noise_power)

    def split_last(self):
        """``(original, new)``: everything but the nearest region, and that region."""
        if self.groups < 2:
            raise ValueError("need at least two regions to split off a new group")
        head = ScenarioGeometry(self.regions[:-1], self.users_per_region[:-1], self.antennas,
                                self.pathloss_exponent, self.noise_power)
        return head, (self.regions[-1], self.users_per_region[-1])


_PRESETS = {
    "A": [(90, 100), (40, 50), (10, 15)],
    "B": [(110, 120), (90, 100), (40, 50), (10, 15)],
    "C": [(160, 170), (90, 100), (40, 50), (10, 15)],
    "E": [(70, 90), (10, 20)],
}


def preset_geometry(model, delta_d=None, *, antennas=8, users=3,
                    pathloss_exponent=2.5, noise_power=1e-8):
    """Deterministic region layouts ``A``, ``B``, ``C``, ``E`` and the variable layout ``D``.

    Model ``D`` keeps region 0 at (60, 70) m and places region 1 at
    (60 - delta_d, 70 - delta_d) m, with ``0 <= delta_d < 60``.
    """
    tag = str(model).upper()
    if tag == "D":
        if delta_d is None:
            raise ValueError("model D needs delta_d")
        if not 0 <= delta_d < 60:
            raise ValueError(f"delta_d must lie in [0, 60), got {delta_d}")
        bounds = [(60.0, 70.0), (60.0 - delta_d, 70.0 - delta_d)]
    elif tag in _PRESETS:
        if delta_d is not None:
            raise ValueError(f"model {tag} takes no delta_d")
        bounds = _PRESETS[tag]
    else:
        raise ValueError(f"unknown region model {model!r}")
    regions = tuple(RegionSpec(float(a), float(b)) for a, b in bounds)
    if np.isscalar(users):
        users = (int(users),) * len(regions)
    return ScenarioGeometry(regions, tuple(users), int(antennas),
                            float(pathloss_exponent), float(noise_power))


@dataclass(frozen=True)
class ChannelRealization:
    """Channels ``h[g]`` of shape ``(U_g, M)`` and the distances behind them."""
    geometry: ScenarioGeometry
    h: tuple
    distances: tuple
    seed: Optional[int] = None

    def __post_init__(self):
        M = self.geometry.antennas
        hs = tuple(_frozen(np.atleast_2d(x), complex) for x in self.h)
        ds = tuple(_frozen(np.atleast_1d(x), float) for x in self.distances)
        if len(hs) != self.geometry.groups or len(ds) != len(hs):
            raise ValueError("one channel matrix and distance vector per group expected")
        for g, (hg, dg) in enumerate(zip(hs, ds)):
            if hg.shape != (self.geometry.users_per_region[g], M):
                raise ValueError(f"group {g}: channel shape {hg.shape} does not match geometry")
            if dg.shape != (hg.shape[0],):
                raise ValueError(f"group {g}: distance count does not match user count")
        object.__setattr__(self, "h", hs)
        object.__setattr__(self, "distances", ds)

    @property
    def groups(self):
        return len(self.h)

    @property
    def noise_power(self):
        return self.geometry.noise_power

    def normalized(self):
        """Channels divided by the noise amplitude (so the noise power is 1)."""
        s = np.sqrt(self.geometry.noise_power)
        return [hg / s for hg in self.h]

    def subset(self, groups):
        """Realization restricted to the listed groups (kept in the given order)."""
        groups = list(groups)
        geo = self.geometry
        sub = ScenarioGeometry(tuple(geo.regions[g] for g in groups),
                               tuple(geo.users_per_region[g] for g in groups),
                               geo.antennas, geo.pathloss_exponent, geo.noise_power)
        return ChannelRealization(sub, tuple(self.h[g] for g in groups),
                                  tuple(self.distances[g] for g in groups), self.seed)


def sample_channels(geometry: ScenarioGeometry, seed) -> ChannelRealization:
    """Uniform in-region distances and unit-variance Rayleigh fading.

    ``h = g * d**(-alpha / 2)`` with ``g`` circular complex Gaussian.  The
    draws happen group by group (distances first, then fading), so two
    geometries with the same counts share their random numbers for a seed.
    """
    rng = np.random.default_rng(seed)
    M = geometry.antennas
    hs, ds = [], []
    for region, U in zip(geometry.regions, geometry.users_per_region):
        d = rng.uniform(region.d_min, region.d_max, size=U)
        g = (rng.standard_normal((U, M)) + 1j * rng.standard_normal((U, M))) / np.sqrt(2.0)
        hs.append(g * d[:, None] ** (-geometry.pathloss_exponent / 2.0))
        ds.append(d)
    return ChannelRealization(geometry, tuple(hs), tuple(ds),
                              seed if isinstance(seed, (int, np.integer)) else None)


@dataclass(frozen=True)
class BeamformerSet:
    """One complex beam per group, plus an optional beam for a new (nearest) group."""
    beams: np.ndarray
    new: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "beams", _frozen(np.atleast_2d(self.beams), complex))
        if self.new is not None:
            new = _frozen(np.ravel(self.new), complex)
            if new.size != self.beams.shape[1]:
                raise ValueError("new-group beam length differs from the other beams")
            object.__setattr__(self, "new", new)

    @property
    def antennas(self):
        return self.beams.shape[1]

    def stacked(self):
        """All beams in decoding order, the new-group beam last."""
        if self.new is None:
            return np.asarray(self.beams)
        return np.vstack([self.beams, self.new[None, :]])

    @property
    def powers(self):
        return np.sum(np.abs(self.stacked()) ** 2, axis=1)

    @property
    def total_power(self):
        return float(np.sum(self.powers))

    def scaled(self, factor):
        return BeamformerSet(self.beams * factor, None if self.new is None else self.new * factor)

    @classmethod
    def from_stacked(cls, W, with_new=False):
        W = np.atleast_2d(W)
        if with_new:
            return cls(W[:-1], W[-1])
        return cls(W)

    @classmethod
    def zeros(cls, groups, antennas, with_new=False):
        return cls(np.zeros((groups, antennas), complex),
                   np.zeros(antennas, complex) if with_new else None)


def _as_stack(W):
    return W.stacked() if isinstance(W, BeamformerSet) else np.atleast_2d(W)


def sinr_own(W, h, g, noise_power):
    """SINR of a group-``g`` user decoding its own message (beams after ``g`` interfere)."""
    Ws = _as_stack(W)
    if not 0 <= g < Ws.shape[0]:
        raise ValueError(f"group index {g} out of range")
    gains = np.abs(Ws.conj() @ h) ** 2
    return float(gains[g] / (gains[g + 1:].sum() + noise_power))


def sinr_cross(W, h, g, i, noise_power):
    """SINR of a group-``g`` user decoding group ``i``'s message, ``i < g``."""
    if not 0 <= i < g:
        raise ValueError(f"cross SINR needs 0 <= i < g, got i={i}, g={g}")
    Ws = _as_stack(W)
    if g >= Ws.shape[0]:
        raise ValueError(f"group index {g} out of range")
    gains = np.abs(Ws.conj() @ h) ** 2
    return float(gains[i] / (gains[i + 1:].sum() + noise_power))


@dataclass(frozen=True)
class SinrConstraint:
    """``|h^H w_target|^2 >= threshold * (sum_k |h^H w_k|^2 + noise)`` for one user.

    ``group``/``user`` locate the channel, ``target`` is the beam carrying the
    message and ``interferers`` the beams counted as interference.
    """
    group: int
    user: int
    target: int
    interferers: tuple
    threshold: float
    kind: str = "qos"


def noma_constraints(users_per_group: Sequence[int], thresholds, nbeams=None):
    """QoS and SIC constraints of the NOMA scheme with the natural decoding order.

    ``thresholds[i]`` is the SINR needed to decode message ``i``.  A zero
    threshold drops that group's QoS rows (its SIC rows for others stay).
    """
    G = len(users_per_group)
    nb = G if nbeams is None else nbeams
    out = []
    for g in range(G):
        for u in range(users_per_group[g]):
            if thresholds[g] > 0:
                out.append(SinrConstraint(g, u, g, tuple(range(g + 1, nb)), float(thresholds[g]), "qos"))
            for i in range(g):
                out.append(SinrConstraint(g, u, i, tuple(range(i + 1, nb)), float(thresholds[i]), "sic"))
    return out


def sdma_constraints(users_per_group: Sequence[int], thresholds):
    """QoS constraints with every other group's beam treated as noise."""
    G = len(users_per_group)
    return [SinrConstraint(g, u, g, tuple(k for k in range(G) if k != g), float(thresholds[g]), "qos")
            for g in range(G) for u in range(users_per_group[g])]


def constraint_sinrs(W, h_groups, constraints, noise_power):
    """Achieved SINR of every constraint (``h_groups[g]`` is ``(U_g, M)``)."""
    Ws = _as_stack(W)
    out = np.empty(len(constraints))
    for n, c in enumerate(constraints):
        gains = np.abs(Ws.conj() @ h_groups[c.group][c.user]) ** 2
        out[n] = gains[c.target] / (gains[list(c.interferers)].sum() + noise_power)
    return out


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    worst_violation: float   # max relative shortfall 1 - SINR / threshold (<= 0 when met)
    worst: Optional[SinrConstraint] = None
    shortfalls: np.ndarray = field(default=None, repr=False)

    def __bool__(self):
        return self.ok


def check_constraints(W, h_groups, constraints, noise_power, slack=1e-6) -> FeasibilityReport:
    if not constraints:
        return FeasibilityReport(True, -np.inf, None, np.zeros(0))
    sinr = constraint_sinrs(W, h_groups, constraints, noise_power)
    thr = np.array([c.threshold for c in constraints])
    short = 1.0 - sinr / thr
    k = int(np.argmax(short))
    return FeasibilityReport(bool(short[k] <= slack), float(short[k]), constraints[k], short)


def check_feasible(W, realization: ChannelRealization, thresholds, noise_power=None,
                   slack=1e-6) -> FeasibilityReport:
    """NOMA QoS + SIC feasibility of ``W`` at relative ``slack``.

    ``realization`` holds one channel group per beam of ``W`` (including a
    new-group beam if present); ``thresholds`` has one entry per beam.
    """
    noise = realization.noise_power if noise_power is None else noise_power
    Ws = _as_stack(W)
    if Ws.shape[0] != realization.groups or len(thresholds) != realization.groups:
        raise ValueError("need one beam and one threshold per channel group")
    cons = noma_constraints(realization.geometry.users_per_region, thresholds)
    return check_constraints(Ws, realization.h, cons, noise, slack)
