"""Perron-tree rectangle families with small union and disjoint reaches.

The construction starts from a triangle with unit-length base whose base-to-
apex directions span a prescribed angular interval.  The base is split into
2**depth equal cells; sibling cells are merged bottom-up, translating each
right sibling left along the base by overlap_parameter times the sibling's
base width.  Because a leaf's accumulated shift is overlap_parameter * i / N
for leaf index i, the final layout is an explicit closed form.  A unit-length
rectangle of width 1/N is anchored at each shifted base cell, pointing along
the midpoint of the leaf's angular cell; its reach is the translate by -2
along its own direction, on the side away from the tree body.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import geometry
from .errors import ConstructionFailure, DirectionMismatch, GeometryError
from .geometry import ConvexPolygon, OrientedRect

K_STAR_HALF_SIDE = 4.0   # the fixed compact box containing every family
DEFAULT_EPS_TOL = 1e-3


@dataclass(frozen=True)
class PerronParams:
    """Parameters of the bisection-and-translate construction."""

    depth: int
    base_angle: float = math.pi / 2
    half_aperture: float = math.pi / 8
    overlap_parameter: float = 0.5

    def __post_init__(self):
        if not 0 <= self.depth <= 16:
            raise GeometryError("depth must be in [0, 16]")
        if not 0.0 < self.half_aperture <= math.pi / 8:
            raise GeometryError("half_aperture must be in (0, pi/8]")
        if not 0.0 < self.overlap_parameter < 1.0:
            raise GeometryError("overlap_parameter must be in (0, 1)")

    @property
    def count(self) -> int:
        return 2 ** self.depth


@dataclass
class VerificationReport:
    dimensions_ok: bool
    measure_ok: bool
    reaches_disjoint: bool
    contained_in_kstar: bool
    measured_eps: float
    eps_err_bound: float
    eps_target: float
    violating_pair: tuple | None = None

    @property
    def all_ok(self) -> bool:
        return (self.dimensions_ok and self.measure_ok and
                self.reaches_disjoint and self.contained_in_kstar)

    def as_dict(self) -> dict:
        return {
            "dimensions_ok": self.dimensions_ok,
            "measure_ok": self.measure_ok,
            "reaches_disjoint": self.reaches_disjoint,
            "contained_in_kstar": self.contained_in_kstar,
            "measured_eps": self.measured_eps,
            "eps_err_bound": self.eps_err_bound,
            "eps_target": self.eps_target,
            "violating_pair": list(self.violating_pair)
            if self.violating_pair else None,
        }


@dataclass
class BesicovitchFamily:
    """N unit-length rectangles, their reaches, directions, and the box K*."""

    rects: list
    directions: list
    k_star: tuple = (-K_STAR_HALF_SIDE, -K_STAR_HALF_SIDE,
                     K_STAR_HALF_SIDE, K_STAR_HALF_SIDE)
    achieved_eps: float = float("nan")
    eps_err_bound: float = float("nan")
    eps_tol: float = DEFAULT_EPS_TOL
    params: PerronParams | None = None
    reaches: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.rects) != len(self.directions):
            raise GeometryError("rects and directions must have equal length")
        if not self.reaches:
            self.reaches = [r.reach() for r in self.rects]

    @property
    def count(self) -> int:
        return len(self.rects)

    def rect_polygons(self):
        return [r.polygon() for r in self.rects]

    def reach_polygons(self):
        return [r.polygon() for r in self.reaches]

    def mean_direction(self):
        sx = sum(d[0] for d in self.directions)
        sy = sum(d[1] for d in self.directions)
        norm = math.hypot(sx, sy)
        if norm == 0.0:
            return (0.0, 1.0)
        return (sx / norm, sy / norm)

    @property
    def angular_spacing(self) -> float:
        if self.params is not None:
            return 2.0 * self.params.half_aperture / max(self.count, 1)
        angles = sorted(math.atan2(d[1], d[0]) for d in self.directions)
        if len(angles) < 2:
            return math.pi
        return max(a1 - a0 for a0, a1 in zip(angles[:-1], angles[1:]))

    def rotated(self, angle: float, center=(0.0, 0.0)) -> "BesicovitchFamily":
        rects = [r.rotated(angle, center) for r in self.rects]
        return BesicovitchFamily(
            rects=rects, directions=[r.direction for r in rects],
            k_star=self.k_star, achieved_eps=self.achieved_eps,
            eps_err_bound=self.eps_err_bound, eps_tol=self.eps_tol,
            params=self.params)

    def to_json_dict(self) -> dict:
        return {
            "count": self.count,
            "rects": [{"center": list(r.center), "direction": list(r.direction),
                       "length": r.length, "width": r.width}
                      for r in self.rects],
            "directions": [list(d) for d in self.directions],
            "k_star": list(self.k_star),
            "achieved_eps": self.achieved_eps,
            "eps_err_bound": self.eps_err_bound,
            "eps_tol": self.eps_tol,
            "params": None if self.params is None else {
                "depth": self.params.depth,
                "base_angle": self.params.base_angle,
                "half_aperture": self.params.half_aperture,
                "overlap_parameter": self.params.overlap_parameter,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json_dict(cls, d: dict) -> "BesicovitchFamily":
        rects = [OrientedRect(tuple(r["center"]), tuple(r["direction"]),
                              r["length"], r["width"]) for r in d["rects"]]
        params = None
        if d.get("params"):
            p = d["params"]
            params = PerronParams(p["depth"], p["base_angle"],
                                  p["half_aperture"], p["overlap_parameter"])
        return cls(rects=rects,
                   directions=[tuple(x) for x in d["directions"]],
                   k_star=tuple(d["k_star"]),
                   achieved_eps=d["achieved_eps"],
                   eps_err_bound=d["eps_err_bound"],
                   eps_tol=d["eps_tol"], params=params)


def _leaf_layout(params: PerronParams):
    """Shifted base midpoints and angular-cell midpoint directions."""
    n = params.count
    alpha = params.overlap_parameter
    tilt = params.base_angle - math.pi / 2
    out = []
    for i in range(n):
        base_x = (i + 0.5) / n - alpha * i / n
        theta = params.half_aperture * (2 * (i + 0.5) / n - 1.0)
        # leftmost base cell leans right and vice versa, like the
        # base-to-apex scaffold directions; reaches then fan apart below
        angle = math.pi / 2 + theta + tilt
        out.append((base_x, angle))
    return out


def build_perron_family(params: PerronParams, *, eps_tol: float = DEFAULT_EPS_TOL,
                        measure: bool = True, workers=None) -> BesicovitchFamily:
    """Construct the rectangle family and verify its defining properties.

    Raises :class:`ConstructionFailure` when the reaches are not pairwise
    disjoint at these parameters (reported with the first violating pair).
    """
    n = params.count
    tilt = params.base_angle - math.pi / 2
    cos_t, sin_t = math.cos(tilt), math.sin(tilt)
    rects = []
    for base_x, angle in _leaf_layout(params):
        bx, by = base_x * cos_t, base_x * sin_t   # base point rotated by tilt
        dx, dy = math.cos(angle), math.sin(angle)
        center = (bx + 0.5 * dx, by + 0.5 * dy)
        rects.append(OrientedRect(center, (dx, dy), 1.0, 1.0 / n))
    family = BesicovitchFamily(rects=rects,
                               directions=[r.direction for r in rects],
                               eps_tol=eps_tol, params=params)
    ok, pair = geometry.pairwise_disjoint(family.reaches)
    if not ok:
        raise ConstructionFailure(
            f"reaches {pair[0]} and {pair[1]} overlap at depth {params.depth}, "
            f"aperture {params.half_aperture:.4g}, overlap "
            f"{params.overlap_parameter:.4g}", violating_pair=pair)
    box = family.k_star
    kstar_poly = ConvexPolygon([(box[0], box[1]), (box[2], box[1]),
                                (box[2], box[3]), (box[0], box[3])],
                               validate=False)
    for idx, rect in enumerate(family.rects):
        if not kstar_poly.contains_polygon(rect.polygon(), tol=1e-12):
            raise ConstructionFailure(f"rectangle {idx} escapes K*")
    if measure:
        eps, err = geometry.union_measure(family.rect_polygons(), eps_tol,
                                          scan_axis=family.mean_direction(),
                                          workers=workers)
        family.achieved_eps = eps
        family.eps_err_bound = err
    return family


def assign_directions(family: BesicovitchFamily, wanted,
                      *, remeasure: bool = True,
                      workers=None) -> BesicovitchFamily:
    """Rotate/reorder the family so rectangle n is parallel to wanted[n].

    Pairing is by nearest angle modulo pi (ties broken by lower index); each
    rectangle is rotated about its own center by the smallest angle that makes
    it parallel, and its stored direction takes the wanted sign, which fixes
    the side its reach lies on.  Defining properties are re-verified.
    """
    n = family.count
    if len(wanted) != n:
        raise DirectionMismatch(
            f"wanted {len(wanted)} directions for a family of {n}")
    for w in wanted:
        if abs(math.hypot(*w) - 1.0) > 1e-9:
            raise DirectionMismatch("wanted directions must be unit vectors")
    spacing = family.angular_spacing
    have = [r.angle for r in family.rects]
    taken = [False] * n
    new_rects: list = [None] * n
    for m, w in enumerate(wanted):
        want_angle = math.atan2(w[1], w[0])
        best, best_d = None, None
        for j in range(n):
            if taken[j]:
                continue
            d = abs(_wrap_half_pi(want_angle - have[j]))
            if best_d is None or d < best_d - 1e-15:
                best, best_d = j, d
        if best_d > spacing + 1e-12:
            raise DirectionMismatch(
                f"wanted direction {m} is {best_d:.4g} rad from every "
                f"available one (spacing {spacing:.4g})")
        taken[best] = True
        rect = family.rects[best]
        rotated = rect.rotated(_wrap_half_pi(want_angle - rect.angle),
                               center=rect.center)
        new_rects[m] = OrientedRect(rotated.center, tuple(w),
                                    rotated.length, rotated.width)
    out = BesicovitchFamily(rects=new_rects,
                            directions=[r.direction for r in new_rects],
                            k_star=family.k_star, eps_tol=family.eps_tol,
                            params=family.params)
    ok, pair = geometry.pairwise_disjoint(out.reaches)
    if not ok:
        raise ConstructionFailure(
            f"assigned reaches {pair[0]} and {pair[1]} overlap",
            violating_pair=pair)
    if remeasure:
        eps, err = geometry.union_measure(out.rect_polygons(), out.eps_tol,
                                          scan_axis=out.mean_direction(),
                                          workers=workers)
        out.achieved_eps = eps
        out.eps_err_bound = err
    else:
        out.achieved_eps = family.achieved_eps
        out.eps_err_bound = family.eps_err_bound
    return out


def _wrap_half_pi(angle: float) -> float:
    """Wrap an angle to (-pi/2, pi/2]; distance between line directions."""
    a = math.fmod(angle, math.pi)
    if a > math.pi / 2:
        a -= math.pi
    elif a <= -math.pi / 2:
        a += math.pi
    return a


def verify_family(family: BesicovitchFamily, eps_target: float,
                  *, workers=None) -> VerificationReport:
    """Check the four defining properties; failures are report entries."""
    n = family.count
    dims_ok = True
    for rect, d in zip(family.rects, family.directions):
        if (abs(rect.length - 1.0) > 1e-12 or
                abs(rect.width - 1.0 / n) > 1e-12 or
                rect.direction != tuple(d) or
                abs(math.hypot(*rect.direction) - 1.0) > 1e-12):
            dims_ok = False
            break
    if math.isnan(family.achieved_eps):
        eps, err = geometry.union_measure(family.rect_polygons(),
                                          family.eps_tol,
                                          scan_axis=family.mean_direction(),
                                          workers=workers)
        family.achieved_eps, family.eps_err_bound = eps, err
    disjoint, pair = geometry.pairwise_disjoint(family.reaches)
    box = family.k_star
    kstar_poly = ConvexPolygon([(box[0], box[1]), (box[2], box[1]),
                                (box[2], box[3]), (box[0], box[3])],
                               validate=False)
    contained = all(kstar_poly.contains_polygon(r.polygon(), tol=1e-12)
                    for r in family.rects)
    return VerificationReport(
        dimensions_ok=dims_ok,
        measure_ok=family.achieved_eps + family.eps_err_bound < eps_target,
        reaches_disjoint=disjoint,
        contained_in_kstar=contained,
        measured_eps=family.achieved_eps,
        eps_err_bound=family.eps_err_bound,
        eps_target=eps_target,
        violating_pair=pair)
