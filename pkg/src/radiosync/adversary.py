"""Lower-bound probes at desk scale: graph constructions whose bridge
vertices force radio spending, and brute-force wake-offset searches that
defeat under-budgeted schedules.

The searches certify *oblivious* schedules only (fixed on/off strings, no
adaptivity), which is the regime where exhaustive offset enumeration is
meaningful at small n.
"""

from dataclasses import dataclass
from fractions import Fraction

from .core import ConfigError, SimConfig, Topology, complete_topology
from .engine import energy, run
from .policy import PolicyString, basic_policy
from .protocols import ceil_sqrt


@dataclass(frozen=True)
class OffsetWitness:
    """Wake offsets under which no two schedules ever share an on-tick."""

    offsets: tuple
    certified: bool


def two_clique(m: int) -> Topology:
    """Two complete graphs on m/2 vertices joined by a single bridge edge."""
    if m < 2 or m % 2:
        raise ConfigError("two_clique needs an even m >= 2")
    half = m // 2
    edges = set()
    for group in (range(1, half + 1), range(half + 1, m + 1)):
        group = list(group)
        for i, u in enumerate(group):
            for v in group[i + 1:]:
                edges.add((u, v))
    edges.add((1, half + 1))
    return Topology(m=m, edges=frozenset(edges), kind="two-clique")


def l_connected(m: int, ell: int) -> Topology:
    """Two m/2-cliques joined by ell+2 disjoint bridges; ell < m/4 - 2."""
    if m < 2 or m % 2:
        raise ConfigError("l_connected needs an even m >= 2")
    if ell < 1:
        raise ConfigError("ell must be >= 1")
    if not 4 * ell < m - 8:  # ell < m/4 - 2, kept exact in integers
        raise ConfigError(f"need ell < m/4 - 2, got ell={ell}, m={m}")
    half = m // 2
    if ell + 2 > half:
        raise ConfigError("not enough vertices for the bridges")
    base = two_clique(m)
    edges = set(base.edges)
    for i in range(1, ell + 3):
        edges.add((i, half + i))
    return Topology(m=m, edges=frozenset(edges), kind=f"l-connected-{ell}")


def unit_disk(positions, radius) -> Topology:
    """Edges between points at Euclidean distance <= radius, compared on
    exact squared rationals."""
    pts = [(Fraction(x), Fraction(y)) for x, y in positions]
    r2 = Fraction(radius) ** 2
    edges = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dx = pts[i][0] - pts[j][0]
            dy = pts[i][1] - pts[j][1]
            if dx * dx + dy * dy <= r2:
                edges.add((i + 1, j + 1))
    return Topology(m=len(pts), edges=frozenset(edges), kind="unit-disk")


# rational points on the unit circle, scaled per placement radius
_CIRCLE_DIRECTIONS = [(1, 0), (-1, 0), (0, 1), (0, -1)]
for _a, _b, _c in [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25),
                   (20, 21, 29), (9, 40, 41), (12, 35, 37), (28, 45, 53),
                   (11, 60, 61), (33, 56, 65), (16, 63, 65), (48, 55, 73)]:
    for _sx in (1, -1):
        for _sy in (1, -1):
            _CIRCLE_DIRECTIONS.append((Fraction(_sx * _a, _c), Fraction(_sy * _b, _c)))
            _CIRCLE_DIRECTIONS.append((Fraction(_sx * _b, _c), Fraction(_sy * _a, _c)))


def unit_disk_two_clique(m: int, radius=2) -> tuple:
    """Planar realization of the two-clique construction.

    Each half sits on a circle of radius r/2 (its diameter, r, is the
    transmission range, so each half is a clique); the designated bridge
    endpoints face each other at distance exactly r and every other cross
    pair is strictly farther.  Returns (positions, radius, topology).
    """
    if m < 2 or m % 2:
        raise ConfigError("unit_disk_two_clique needs an even m >= 2")
    half = m // 2
    if half > len(_CIRCLE_DIRECTIONS) - 1:
        raise ConfigError(f"placement supports at most {2 * (len(_CIRCLE_DIRECTIONS) - 1)} vertices")
    r = Fraction(radius)
    rr = r / 2
    left_centre = (Fraction(0), Fraction(0))
    right_centre = (2 * r, Fraction(0))
    # the bridge endpoints take the facing extreme points; everyone else
    # takes directions with a strictly smaller facing coordinate
    dirs = [d for d in _CIRCLE_DIRECTIONS if d != (1, 0) and d != (-1, 0)]
    left = [(rr, Fraction(0))]
    right = [(2 * r - rr, Fraction(0))]
    for i in range(half - 1):
        dx, dy = dirs[i]
        left.append((left_centre[0] + rr * dx, left_centre[1] + rr * dy))
        right.append((right_centre[0] - rr * dx, right_centre[1] + rr * dy))
    positions = left + right
    return positions, r, unit_disk(positions, r)


def build_topology(spec, m: int | None = None) -> Topology:
    """Dispatch a textual topology spec to its constructor.

    Accepts "complete", "two-clique", "l-connected:L", "unit-disk" (the
    planar two-clique placement) or an explicit Topology.
    """
    if isinstance(spec, Topology):
        return spec
    if spec == "complete":
        if m is None:
            raise ConfigError("complete topology needs m")
        return complete_topology(m)
    if spec == "two-clique":
        return two_clique(m)
    if spec.startswith("l-connected:"):
        return l_connected(m, int(spec.split(":", 1)[1]))
    if spec == "unit-disk":
        return unit_disk_two_clique(m)[2]
    raise ConfigError(f"unknown topology spec {spec!r}")


def _masks(schedules):
    out = []
    for s in schedules:
        if isinstance(s, PolicyString):
            out.append(s.mask)
        else:
            m = 0
            for i, b in enumerate(s):
                if b:
                    m |= 1 << i
            out.append(m)
    return out


def _pair_overlaps(mask_a, mask_b, d):
    if d >= 0:
        return (mask_a >> d) & mask_b != 0
    return (mask_b >> (-d)) & mask_a != 0


def search_non_overlap(schedules, n: int) -> OffsetWitness | None:
    """Find wake offsets in [0, n] with zero pairwise overlap, or None.

    Exhaustive for up to three schedules (offsets are shift-invariant, so
    the first is pinned to 0); beyond that, offsets are composed pairwise
    against the first schedule and the composition is then re-verified, so
    any returned witness is sound even though the search is not complete.
    """
    masks = _masks(schedules)
    if not masks:
        return OffsetWitness(offsets=(), certified=True)
    if len(masks) <= 3:
        found = _search_exhaustive(masks, n)
    else:
        found = _search_pairwise(masks, n)
    if found is None:
        return None
    offsets = tuple(found)
    if _verify_witness(masks, offsets):
        return OffsetWitness(offsets=offsets, certified=True)
    return None


def _verify_witness(masks, offsets):
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if _pair_overlaps(masks[i], masks[j], offsets[j] - offsets[i]):
                return False
    return True


def _search_exhaustive(masks, n):
    if len(masks) == 1:
        return [0]
    if len(masks) == 2:
        # offsets with the first schedule at 0 sort lexicographically first
        for d in [*range(0, n + 1), *range(-1, -n - 1, -1)]:
            if not _pair_overlaps(masks[0], masks[1], d):
                return [max(0, -d), max(0, d)]
        return None
    for d1 in range(-n, n + 1):
        if _pair_overlaps(masks[0], masks[1], d1):
            continue
        for d2 in range(-n, n + 1):
            if _pair_overlaps(masks[0], masks[2], d2):
                continue
            if _pair_overlaps(masks[1], masks[2], d2 - d1):
                continue
            base = max(0, -d1, -d2)
            if max(base, base + d1, base + d2) <= n:
                return [base, base + d1, base + d2]
    return None


def _search_pairwise(masks, n):
    offsets = [0]
    for mask in masks[1:]:
        placed = None
        for t in range(n + 1):
            if all(not _pair_overlaps(masks[i], mask, t - offsets[i])
                   for i in range(len(offsets))):
                placed = t
                break
        if placed is None:
            return None
        offsets.append(placed)
    return offsets


def schedule_family(n: int, c: int) -> dict:
    """Structured length-bounded schedules with exactly c on-ticks each:
    evenly spaced, a solid prefix, and a truncated basic policy."""
    if c < 1 or c > n + 1:
        raise ConfigError("need 1 <= c <= n + 1")
    family = {}
    if c == 1:
        family["evenly-spaced"] = (1,)
    else:
        span = n
        positions = sorted({(i * span) // (c - 1) for i in range(c)})
        bits = [0] * (positions[-1] + 1)
        for p in positions:
            bits[p] = 1
        family["evenly-spaced"] = tuple(bits)
    family["prefix"] = (1,) * c
    k = ceil_sqrt(n)
    ones = [j for j, b in enumerate(basic_policy(k).bits) if b][:c]
    bits = [0] * (ones[-1] + 1)
    for p in ones:
        bits[p] = 1
    family["basic-truncated"] = tuple(bits)
    return family


def budget_curve(n: int, c_max: int) -> list:
    """For each on-budget c, whether every structured schedule of c ones is
    defeated by some offset pair (a desk-scale probe, not a proof)."""
    rows = []
    for c in range(1, c_max + 1):
        family = schedule_family(n, c)
        outcomes = {}
        for name, bits in sorted(family.items()):
            w = search_non_overlap([bits, bits], n)
            outcomes[name] = None if w is None else w.offsets
        rows.append({
            "n": n,
            "budget": c,
            "defeated": {name: off for name, off in outcomes.items() if off is not None},
            "safe": sorted(name for name, off in outcomes.items() if off is None),
            "all_defeated": all(off is not None for off in outcomes.values()),
        })
    return rows


def multi_hop_experiment(topology, n: int, algorithm: str,
                         wake_times="uniform-spread", seed: int = 0) -> dict:
    """Run a baseline algorithm on a multi-hop topology and report energy
    plus per-edge first-contact coverage."""
    if algorithm not in ("pairwise", "naive"):
        raise ConfigError("multi-hop baselines are pairwise and naive")
    topo = build_topology(topology, m=None) if isinstance(topology, Topology) else topology
    cfg = SimConfig(n=n, m=topo.m, wake_times=wake_times, topology=topo,
                    algorithm=algorithm, seed=seed)
    trace = run(cfg)
    rep = energy(trace)
    contacted = set(trace.edge_contacts)
    missing = sorted(set(topo.edges) - contacted)
    return {
        "algorithm": algorithm,
        "n": n,
        "m": topo.m,
        "topology": topo.kind,
        "edges": len(topo.edges),
        "edges_contacted": len(contacted & set(topo.edges)),
        "edges_missing": missing,
        "all_edges_contacted": not missing,
        "total_energy": rep.total_energy,
        "max_energy": rep.max_energy,
        "per_processor": rep.per_processor,
        "first_contacts": {f"{u}-{v}": (t, str(d))
                           for (u, v), (t, d) in sorted(trace.edge_contacts.items())},
        "sync_complete_tick": rep.sync_complete_tick,
    }
