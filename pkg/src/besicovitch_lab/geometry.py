"""Exact planar convex geometry kernel.

Convex polygons and oriented rectangles, half-plane clipping, and certified
measures of unions / overlap-count functions of polygon families.

Union and count integrals use a scanline-slab method: the plane is cut into
slabs perpendicular to a scan axis, seeded at every polygon vertex, and each
polygon contributes per-slab inner/outer interval bounds.  Because the inner
interval is contained in every row's true cross-section and the outer one
contains it, every functional of the overlap-count function is bracketed
rigorously; slabs are split adaptively until the bracket width certifies the
requested tolerance.  All reductions run in a fixed order, so results are
independent of the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ToleranceUnachievable
from .parallel import map_ordered

ORIENT_EPS = 1e-12     # orientation-test epsilon for clipping predicates
SLIVER_AREA = 1e-15    # polygons thinner than this are normalized to empty
UNIT_TOL = 1e-12       # |direction| must be 1 within this

_CHUNK = 256           # slabs per evaluation chunk (fixed: determinism)


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


class ConvexPolygon:
    """Convex planar region with CCW vertices; the empty region is a value."""

    __slots__ = ("v",)

    def __init__(self, vertices, validate: bool = True):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if v.shape[0] and not np.all(np.isfinite(v)):
            raise GeometryError("polygon vertices must be finite")
        if v.shape[0] >= 3:
            if _shoelace(v) < 0.0:
                v = v[::-1].copy()
            if abs(_shoelace(v)) < SLIVER_AREA:
                v = np.empty((0, 2))
            elif validate:
                scale = float(np.max(np.abs(v))) or 1.0
                e = np.roll(v, -1, axis=0) - v
                cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - \
                    e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
                if np.any(cross < -ORIENT_EPS * scale * scale):
                    raise GeometryError("vertices do not bound a convex region")
        else:
            v = np.empty((0, 2))
        self.v = v

    @property
    def empty(self) -> bool:
        return self.v.shape[0] == 0

    @property
    def area(self) -> float:
        return 0.0 if self.empty else _shoelace(self.v)

    def translated(self, d) -> "ConvexPolygon":
        if self.empty:
            return self
        return ConvexPolygon(self.v + np.asarray(d, dtype=float), validate=False)

    def rotated(self, angle: float, center=(0.0, 0.0)) -> "ConvexPolygon":
        if self.empty:
            return self
        c, s = math.cos(angle), math.sin(angle)
        ctr = np.asarray(center, dtype=float)
        rel = self.v - ctr
        rot = np.column_stack((c * rel[:, 0] - s * rel[:, 1],
                               s * rel[:, 0] + c * rel[:, 1]))
        return ConvexPolygon(rot + ctr, validate=False)

    def bbox(self):
        if self.empty:
            return (0.0, 0.0, 0.0, 0.0)
        return (float(self.v[:, 0].min()), float(self.v[:, 1].min()),
                float(self.v[:, 0].max()), float(self.v[:, 1].max()))

    def contains_point(self, p, tol: float = 0.0) -> bool:
        if self.empty:
            return False
        v = self.v
        e = np.roll(v, -1, axis=0) - v
        rel_x = p[0] - v[:, 0]
        rel_y = p[1] - v[:, 1]
        return bool(np.all(e[:, 0] * rel_y - e[:, 1] * rel_x >= -tol))

    def contains_polygon(self, other: "ConvexPolygon", tol: float = 0.0) -> bool:
        if other.empty:
            return True
        return all(self.contains_point(q, tol) for q in other.v)

    def __repr__(self):
        if self.empty:
            return "ConvexPolygon(empty)"
        return f"ConvexPolygon({self.v.shape[0]} vertices, area={self.area:.6g})"


EMPTY_POLYGON = ConvexPolygon(())


def square(center=(0.0, 0.0), side: float = 1.0) -> ConvexPolygon:
    h = 0.5 * side
    cx, cy = center
    return ConvexPolygon([(cx - h, cy - h), (cx + h, cy - h),
                          (cx + h, cy + h), (cx - h, cy + h)], validate=False)


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle given by center, unit long-side direction, length and width."""

    center: tuple
    direction: tuple
    length: float
    width: float

    def __post_init__(self):
        dx, dy = self.direction
        if abs(math.hypot(dx, dy) - 1.0) > UNIT_TOL:
            raise GeometryError("direction must be a unit vector")
        if not (self.length > 0.0 and self.width > 0.0):
            raise GeometryError("length and width must be positive")

    def polygon(self) -> ConvexPolygon:
        cx, cy = self.center
        dx, dy = self.direction
        hl, hw = 0.5 * self.length, 0.5 * self.width
        ax, ay = hl * dx, hl * dy        # half long side
        bx, by = -hw * dy, hw * dx       # half short side
        return ConvexPolygon([(cx - ax - bx, cy - ay - by),
                              (cx + ax - bx, cy + ay - by),
                              (cx + ax + bx, cy + ay + by),
                              (cx - ax + bx, cy - ay + by)], validate=False)

    def translated(self, d) -> "OrientedRect":
        return OrientedRect((self.center[0] + d[0], self.center[1] + d[1]),
                            self.direction, self.length, self.width)

    def rotated(self, angle: float, center=(0.0, 0.0)) -> "OrientedRect":
        c, s = math.cos(angle), math.sin(angle)
        px, py = self.center[0] - center[0], self.center[1] - center[1]
        dx, dy = self.direction
        return OrientedRect((center[0] + c * px - s * py,
                             center[1] + s * px + c * py),
                            (c * dx - s * dy, s * dx + c * dy),
                            self.length, self.width)

    def reach(self) -> "OrientedRect":
        dx, dy = self.direction
        return self.translated((-2.0 * dx, -2.0 * dy))

    @property
    def angle(self) -> float:
        return math.atan2(self.direction[1], self.direction[0])


# ----------------------------------------------------------------------------
# Half-plane clipping
# ----------------------------------------------------------------------------

def _clip_rings(subject, clipper):
    """Sutherland-Hodgman on vertex lists (CCW).  Returns a vertex list."""
    out = subject
    n = len(clipper)
    for i in range(n):
        if not out:
            return []
        ax, ay = clipper[i]
        bx, by = clipper[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inp = out
        out = []
        px, py = inp[-1]
        pin = ex * (py - ay) - ey * (px - ax) >= -ORIENT_EPS
        for qx, qy in inp:
            qin = ex * (qy - ay) - ey * (qx - ax) >= -ORIENT_EPS
            if qin != pin:
                dx, dy = qx - px, qy - py
                den = ex * dy - ey * dx
                if den != 0.0:
                    t = (ex * (ay - py) - ey * (ax - px)) / den
                    out.append((px + t * dx, py + t * dy))
            if qin:
                out.append((qx, qy))
            px, py, pin = qx, qy, qin
    return out


def intersect_convex(p: ConvexPolygon, q: ConvexPolygon) -> ConvexPolygon:
    """Intersection of two convex polygons (possibly empty)."""
    if p.empty or q.empty:
        return EMPTY_POLYGON
    ring = _clip_rings([tuple(t) for t in p.v], [tuple(t) for t in q.v])
    if len(ring) < 3:
        return EMPTY_POLYGON
    return ConvexPolygon(ring, validate=False)


def _ring_area(ring) -> float:
    a = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def clip_area(subject_rings, clip_ring) -> float:
    """Area of (intersection of `subject_rings`) clipped by one more ring."""
    ring = subject_rings[0]
    for other in subject_rings[1:]:
        ring = _clip_rings(ring, other)
        if len(ring) < 3:
            return 0.0
    ring = _clip_rings(ring, clip_ring)
    if len(ring) < 3:
        return 0.0
    return max(0.0, _ring_area(ring))


# ----------------------------------------------------------------------------
# Separating-axis disjointness
# ----------------------------------------------------------------------------

def _sat_disjoint(va: np.ndarray, vb: np.ndarray) -> bool:
    """True iff the open interiors of two convex polygons are disjoint."""
    for verts in (va, vb):
        edges = np.roll(verts, -1, axis=0) - verts
        normals = np.column_stack((-edges[:, 1], edges[:, 0]))
        pa = va @ normals.T
        pb = vb @ normals.T
        if np.any((pa.max(axis=0) <= pb.min(axis=0)) |
                  (pb.max(axis=0) <= pa.min(axis=0))):
            return True
    return False


def pairwise_disjoint(rects):
    """Check pairwise interior-disjointness of oriented rectangles.

    Returns ``(True, None)`` or ``(False, (i, j))`` with the first violating
    pair in lexicographic order.  Touching boundaries count as disjoint.
    """
    polys = [r.polygon() if isinstance(r, OrientedRect) else r for r in rects]
    n = len(polys)
    if n < 2:
        return True, None
    boxes = np.array([p.bbox() for p in polys])
    for i in range(n - 1):
        overl = ~((boxes[i + 1:, 0] >= boxes[i, 2]) |
                  (boxes[i + 1:, 2] <= boxes[i, 0]) |
                  (boxes[i + 1:, 1] >= boxes[i, 3]) |
                  (boxes[i + 1:, 3] <= boxes[i, 1]))
        for off in np.nonzero(overl)[0]:
            j = i + 1 + int(off)
            if not _sat_disjoint(polys[i].v, polys[j].v):
                return False, (i, j)
    return True, None


# ----------------------------------------------------------------------------
# Scanline-slab engine for certified union / overlap-count measures
# ----------------------------------------------------------------------------

class _SlabEngine:
    """Certified bracketing of functionals of the overlap-count function."""

    def __init__(self, polys, scan_axis=None, workers=None):
        rings = []
        for p in polys:
            poly = p.polygon() if isinstance(p, OrientedRect) else p
            if not poly.empty:
                rings.append(poly.v)
        if scan_axis is not None:
            ax, ay = scan_axis
            norm = math.hypot(ax, ay)
            if norm <= 0.0:
                raise GeometryError("scan_axis must be nonzero")
            ax, ay = ax / norm, ay / norm
            rot = np.array([[ay, -ax], [ax, ay]])
            rings = [r @ rot.T for r in rings]
        self.workers = workers
        self.nseg = len(rings)
        if not rings:
            return
        kmax = max(r.shape[0] for r in rings)
        P = len(rings)
        X = np.zeros((P, kmax))
        Y = np.zeros((P, kmax))
        for i, r in enumerate(rings):
            k = r.shape[0]
            X[i, :k], Y[i, :k] = r[:, 0], r[:, 1]
            X[i, k:], Y[i, k:] = r[k - 1, 0], r[k - 1, 1]  # pad: degenerate edge
        self.X, self.Y = X, Y
        self.Xn, self.Yn = np.roll(X, -1, axis=1), np.roll(Y, -1, axis=1)
        self.ymin = Y.min(axis=1)
        self.ymax = Y.max(axis=1)

    def breakpoints(self) -> np.ndarray:
        # exact unique vertex heights: every polygon's cross-section interval
        # is then affine on every slab, which the trapezoid shortcut needs
        return np.unique(self.Y.ravel())

    def _row_intervals(self, y):
        """Interval [lo, hi] of each polygon on each row of `y` (S,)."""
        yy = y[:, None, None]
        Y0, Y1 = self.Y[None], self.Yn[None]
        X0, X1 = self.X[None], self.Xn[None]
        den = Y1 - Y0
        crossing = ((Y0 - yy) * (Y1 - yy) <= 0.0) & (np.abs(den) > 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = X0 + (yy - Y0) * (X1 - X0) / den
        on_row = np.abs(Y0 - yy) == 0.0
        cand_lo = np.where(crossing, xc, np.inf)
        cand_lo = np.minimum(cand_lo, np.where(on_row, X0, np.inf))
        cand_hi = np.where(crossing, xc, -np.inf)
        cand_hi = np.maximum(cand_hi, np.where(on_row, X0, -np.inf))
        return cand_lo.min(axis=2), cand_hi.max(axis=2)

    def slab_bounds(self, ya, yb):
        """Per-slab inner/outer intervals for every polygon.

        Returns (inner_lo, inner_hi, outer_lo, outer_hi, present); inner is
        valid wherever present (engine slabs never split a polygon's y-range).
        """
        lo_a, hi_a = self._row_intervals(ya)
        lo_b, hi_b = self._row_intervals(yb)
        present = (self.ymin[None] < yb[:, None]) & (self.ymax[None] > ya[:, None])
        vin = (self.Y[None] > ya[:, None, None]) & (self.Y[None] < yb[:, None, None])
        vx_min = np.where(vin, self.X[None], np.inf).min(axis=2)
        vx_max = np.where(vin, self.X[None], -np.inf).max(axis=2)
        inner_lo = np.maximum(lo_a, lo_b)
        inner_hi = np.minimum(hi_a, hi_b)
        outer_lo = np.minimum(np.minimum(lo_a, lo_b), vx_min)
        outer_hi = np.maximum(np.maximum(hi_a, hi_b), vx_max)
        return inner_lo, inner_hi, outer_lo, outer_hi, present

    @staticmethod
    def _sorted_events(starts, ends, valid):
        starts = np.where(valid, starts, 0.0)
        ends = np.where(valid, np.maximum(ends, starts), 0.0)
        S, P = starts.shape
        events = np.concatenate((starts, ends), axis=1)
        deltas = np.concatenate((np.ones((S, P)), -np.ones((S, P))), axis=1)
        order = np.argsort(events, axis=1, kind="stable")
        events = np.take_along_axis(events, order, axis=1)
        deltas = np.take_along_axis(deltas, order, axis=1)
        counts = np.rint(np.cumsum(deltas, axis=1)[:, :-1]).astype(np.int64)
        return events, counts, order

    @classmethod
    def _row_values(cls, starts, ends, valid, weight_fn, hist=None, hist_w=None):
        """Integral of weight_fn(count) over x, per slab row (vectorized)."""
        events, counts, _ = cls._sorted_events(starts, ends, valid)
        seglen = np.diff(events, axis=1)
        vals = (seglen * weight_fn(counts)).sum(axis=1)
        if hist is not None:
            m = counts.ravel()
            w = (seglen * hist_w[:, None]).ravel()
            keep = (m > 0) & (w > 0.0)
            np.add.at(hist, m[keep], w[keep])
        return vals

    def eval_slabs(self, ya, yb, weight_fn, hists=None):
        """Per-slab (lower, upper) contributions, chunked and order-fixed.

        On slabs where the sorted order of all interval endpoints is the same
        at both boundary rows, no endpoints cross inside, the per-row integral
        is linear in the scan coordinate, and the trapezoid value is exact.
        Crossing slabs fall back to the rigorous inner/outer bracket.
        """
        def work(sl):
            a, b = ya[sl], yb[sl]
            w = b - a
            lo_a, hi_a = self._row_intervals(a)
            lo_b, hi_b = self._row_intervals(b)
            pres = ((self.ymin[None] < b[:, None]) &
                    (self.ymax[None] > a[:, None]))
            ev_a, cnt_a, ord_a = self._sorted_events(lo_a, hi_a, pres)
            ev_b, cnt_b, ord_b = self._sorted_events(lo_b, hi_b, pres)
            no_cross = np.all(ord_a == ord_b, axis=1)
            val_a = (np.diff(ev_a, axis=1) * weight_fn(cnt_a)).sum(axis=1)
            val_b = (np.diff(ev_b, axis=1) * weight_fn(cnt_b)).sum(axis=1)
            exact = 0.5 * (val_a + val_b) * w
            lows = exact.copy()
            highs = exact.copy()
            cross = ~no_cross
            h_lo = h_hi = None
            if hists is not None:
                h_lo, h_hi = hists
                for ev, cnt in ((ev_a, cnt_a), (ev_b, cnt_b)):
                    m = cnt[no_cross].ravel()
                    wt = (np.diff(ev[no_cross], axis=1) *
                          (0.5 * w[no_cross])[:, None]).ravel()
                    keep = (m > 0) & (wt > 0.0)
                    np.add.at(h_lo, m[keep], wt[keep])
                    np.add.at(h_hi, m[keep], wt[keep])
            if np.any(cross):
                ac, bc = a[cross], b[cross]
                wc = w[cross]
                ilo, ihi, olo, ohi, pc = self.slab_bounds(ac, bc)
                hw = wc if hists is not None else None
                lo_vals = self._row_values(ilo, ihi, pc & (ihi > ilo),
                                           weight_fn, h_lo, hw)
                hi_vals = self._row_values(olo, ohi, pc, weight_fn, h_hi, hw)
                lows[cross] = lo_vals * wc
                highs[cross] = hi_vals * wc
            return lows, highs
        slices = [slice(i, min(i + _CHUNK, len(ya)))
                  for i in range(0, len(ya), _CHUNK)]
        # histogram accumulation mutates shared arrays: keep it single-threaded
        workers = 1 if hists is not None else self.workers
        parts = map_ordered(work, slices, workers=workers)
        lows = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
        highs = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
        return lows, highs

    def refine(self, weight_fn, tol, max_slabs):
        """Adaptive slab refinement until the bracket half-width is <= tol."""
        if self.nseg == 0:
            return 0.0, 0.0, (np.zeros(0), np.zeros(0))
        bp = self.breakpoints()
        ya, yb = bp[:-1].copy(), bp[1:].copy()
        lows, highs = self.eval_slabs(ya, yb, weight_fn)
        while True:
            err = 0.5 * float((highs - lows).sum())
            if err <= tol:
                break
            if len(ya) >= max_slabs:
                raise ToleranceUnachievable(
                    f"certified error {err:.3g} > tol {tol:.3g} at the "
                    f"{max_slabs}-slab budget", achieved=err, budget=max_slabs)
            gaps = highs - lows
            # equidistribution target: once every gap is below 2*tol/S the
            # total bracket width is below 2*tol and the loop exits
            thresh = 2.0 * tol / max(len(ya), 1)
            split = np.nonzero(gaps > thresh)[0]
            if split.size == 0:
                split = np.array([int(np.argmax(gaps))])
            mid = 0.5 * (ya[split] + yb[split])
            splittable = (mid > ya[split]) & (mid < yb[split])
            if not np.any(splittable):
                raise ToleranceUnachievable(
                    f"certified error {err:.3g} > tol {tol:.3g} with all "
                    "remaining slabs at float resolution", achieved=err)
            split = split[splittable]
            mid = mid[splittable]
            right_end = yb[split].copy()
            child_lo, child_hi = self.eval_slabs(
                np.concatenate((ya[split], mid)),
                np.concatenate((mid, right_end)), weight_fn)
            k = split.size
            yb[split] = mid                      # parent becomes left child
            lows[split] = child_lo[:k]
            highs[split] = child_hi[:k]
            ya = np.concatenate((ya, mid))       # append right children
            yb = np.concatenate((yb, right_end))
            lows = np.concatenate((lows, child_lo[k:]))
            highs = np.concatenate((highs, child_hi[k:]))
        return float(lows.sum()), float(highs.sum()), (ya, yb)


def _engine(polys, scan_axis, workers):
    return _SlabEngine(polys, scan_axis=scan_axis, workers=workers)


def union_measure(polys, tol: float, *, scan_axis=None, max_slabs: int = 400_000,
                  workers=None):
    """Certified Lebesgue measure of a union of convex polygons.

    Returns ``(measure, err_bound)`` with ``|true - measure| <= err_bound <=
    tol``.  Raises :class:`ToleranceUnachievable` if the slab budget runs out.
    """
    if tol <= 0.0:
        raise GeometryError("tol must be positive")
    eng = _engine(polys, scan_axis, workers)
    lo, hi, _ = eng.refine(lambda c: (c >= 1).astype(float), tol, max_slabs)
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def count_lp_integral(polys, q: float, tol: float, *, scan_axis=None,
                      max_slabs: int = 400_000, workers=None) -> float:
    """Certified integral of (sum of indicator functions)**q."""
    if q <= 0.0:
        raise GeometryError("q must be positive")
    if tol <= 0.0:
        raise GeometryError("tol must be positive")
    eng = _engine(polys, scan_axis, workers)
    lo, hi, _ = eng.refine(lambda c: c.astype(float) ** q, tol, max_slabs)
    return 0.5 * (lo + hi)


def overlap_distribution(polys, tol: float, *, scan_axis=None,
                         max_slabs: int = 400_000, workers=None):
    """Measure of {x : overlap count = m} for every m >= 1.

    Certified so that sum_m m * measure(m) matches the total polygon area
    within tol.
    """
    if tol <= 0.0:
        raise GeometryError("tol must be positive")
    eng = _engine(polys, scan_axis, workers)
    weight = lambda c: c.astype(float)
    _, _, (ya, yb) = eng.refine(weight, 0.5 * tol, max_slabs)
    if eng.nseg == 0:
        return {}
    nmax = eng.nseg + 2
    h_lo = np.zeros(nmax)
    h_hi = np.zeros(nmax)
    eng.eval_slabs(ya, yb, weight, hists=(h_lo, h_hi))
    out = {}
    for m in range(1, nmax):
        mass = 0.5 * (h_lo[m] + h_hi[m])
        if mass > 0.0:
            out[m] = float(mass)
    return out
