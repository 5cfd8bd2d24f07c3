"""Measurement battery: peak counts, static strokes, similarity, ANOVA.

These are the instruments used to check that synthetic handwriting evolves
the way real handwriting does: the pen-speed peak count and the stroke
count visible in the rendered image both fall as maturity rises, while the
54-dimensional fuzzy shape features quantify how alike two word images are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats
from scipy.signal import find_peaks
from skimage.morphology import skeletonize

from .evolution import EvolutionConfig, scale_k_sigma, scale_noise
from .kinematics import SampledTrajectory, WriterProfile, synthesize_word
from .plan import GuideLines, GlyphPlan, HexGrid, builtin_library, default_guides

N_ZONE_COLS = 9
N_ZONE_ROWS = 5
N_ZONES = N_ZONE_COLS * N_ZONE_ROWS  # 45
N_CURVATURE = 5
N_SHAPE = 4
N_FEATURES = N_ZONES + N_CURVATURE + N_SHAPE  # 54

ZONE_DENSITY_SATURATION = 0.5     # zone membership reaches 1 at this density
CURVATURE_SPLIT_DEG_PER_MM = 60.0  # split a polyline where turn rate exceeds this
CORE_PROFILE_FRACTION = 0.4        # rows with >= this fraction of peak ink = body
STROKE_SPLIT_WINDOW_MM = 1.2       # turn-rate estimation span for stroke splitting
FEATURE_TURN_WINDOW_MM = 0.5       # finer span for the curvature features
MIN_BRANCH_MM = 2.0                # skeleton branches shorter than this are webbing

_NEIGHBOR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True)
class FeatureVector:
    """54 fuzzy memberships: 45 zone + 5 curvature + 4 shape, each in [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (N_FEATURES,):
            raise ValueError(f"feature vector must have {N_FEATURES} elements")
        if np.any(vals < 0.0) or np.any(vals > 1.0) or not np.all(np.isfinite(vals)):
            raise ValueError("feature values must lie in [0, 1]")


@dataclass(frozen=True)
class SimilarityWeights:
    """Tversky contrast weights for the two difference terms."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("weights must be finite")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("weights must be >= 0")


def count_velocity_peaks(
    traj: SampledTrajectory, prominence: float = 0.05
) -> int:
    """Number of speed maxima rising at least ``prominence * max(speed)``
    above the higher of their flanking minima.

    Scale-free: multiplying the speed profile by a constant leaves the
    count unchanged.
    """
    speed = np.asarray(traj.speed, dtype=float)
    if len(speed) < 3:
        raise ValueError("trajectory needs at least 3 samples")
    top = speed.max()
    if top <= 0.0:
        return 0
    idx, _ = find_peaks(speed, prominence=prominence * top)
    return int(len(idx))


# ---------------------------------------------------------------------------
# Static stroke estimation
# ---------------------------------------------------------------------------


def _skeleton_branches(
    skel: np.ndarray,
) -> tuple[list[np.ndarray], list[np.ndarray], set[tuple[int, int]]]:
    """Trace the skeleton's pixel graph.

    Returns open branches (pixel paths running between endpoints/junctions,
    i.e. pixels whose neighbour count differs from 2), pure cycles, and the
    set of junction pixels (neighbour count >= 3).
    """
    pixels = {(int(r), int(c)) for r, c in zip(*np.nonzero(skel))}

    def neighbors(p):
        r, c = p
        return [(r + dr, c + dc) for dr, dc in _NEIGHBOR_OFFSETS
                if (r + dr, c + dc) in pixels]

    degree = {p: len(neighbors(p)) for p in pixels}
    nodes = {p for p, d in degree.items() if d != 2}
    junctions = {p for p, d in degree.items() if d >= 3}
    branches: list[np.ndarray] = []
    visited = set()

    def edge(a, b):
        return (a, b) if a <= b else (b, a)

    for start in sorted(nodes):
        nbs = sorted(neighbors(start))
        if not nbs:
            branches.append(np.array([start], dtype=float))
            continue
        for nb in nbs:
            if edge(start, nb) in visited:
                continue
            visited.add(edge(start, nb))
            line = [start, nb]
            prev, cur = start, nb
            while cur not in nodes:
                nxts = [q for q in neighbors(cur) if q != prev]
                if not nxts:
                    break
                nxt = nxts[0]
                if edge(cur, nxt) in visited:
                    break
                visited.add(edge(cur, nxt))
                line.append(nxt)
                prev, cur = cur, nxt
            branches.append(np.array(line, dtype=float))

    on_path = {tuple(int(v) for v in p) for pts in branches for p in pts}
    leftovers = sorted(pixels - on_path - nodes)
    cycles: list[np.ndarray] = []
    seen = set()
    for start in leftovers:
        if start in seen:
            continue
        line = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxts = [q for q in neighbors(cur) if q != prev and q not in seen]
            if not nxts:
                break
            nxt = nxts[0]
            seen.add(nxt)
            line.append(nxt)
            prev, cur = cur, nxt
        if len(line) >= 3:
            cycles.append(np.array(line, dtype=float))
    return branches, cycles, junctions


def _skeleton_paths(skel: np.ndarray) -> list[tuple[np.ndarray, bool]]:
    """All raw skeleton polylines as (points, is_closed) pairs."""
    branches, cycles, _ = _skeleton_branches(skel)
    return [(b, False) for b in branches] + [(c, True) for c in cycles]


def _arc_length(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    d = np.diff(pts, axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


def _recover_strokes(
    skel: np.ndarray, resolution: float, min_branch_mm: float = MIN_BRANCH_MM,
    max_join_turn_deg: float = 60.0,
) -> list[tuple[np.ndarray, bool]]:
    """Recover pen-path-like strokes from a skeleton.

    Overlapping ink fragments the skeleton at junctions, so the raw
    branches over-count badly.  Three clean-ups approximate how a writing
    path would run through the picture: junction clusters joined by very
    short connectors collapse into one junction, short spurs hanging off
    junctions are discarded, and branch pairs that continue each other
    smoothly (turn below ``max_join_turn_deg``) are merged through their
    shared junction.
    """
    branches, cycles, junctions = _skeleton_branches(skel)
    min_len_px = min_branch_mm * resolution
    debris_px = 0.5 * min_branch_mm * resolution
    window = max(2, int(round(0.5 * resolution)))

    groups = _UnionFind()
    kept: list[np.ndarray] = []
    for pts in branches:
        a = tuple(int(v) for v in pts[0])
        b = tuple(int(v) for v in pts[-1])
        length = _arc_length(pts)
        if length < min_len_px and a in junctions and b in junctions:
            groups.union(a, b)  # connector inside one junction cluster
        elif length < min_len_px and (a in junctions or b in junctions):
            continue  # spur
        elif length < debris_px:
            continue  # isolated thinning debris
        else:
            kept.append(pts)
    if not kept and not cycles:
        # everything was webbing; fall back to the longest raw branch
        kept = [max(branches, key=_arc_length)] if branches else []

    # Ends incident to a junction cluster, with their inward directions.
    ends_at: dict = {}
    directions: dict = {}
    for bi, pts in enumerate(kept):
        for side in (0, 1):
            node = tuple(int(v) for v in (pts[0] if side == 0 else pts[-1]))
            if node not in junctions:
                continue
            key = groups.find(node)
            ends_at.setdefault(key, []).append((bi, side))
            if side == 0:
                inner = pts[min(window, len(pts) - 1)]
                node_pt = pts[0]
            else:
                inner = pts[max(0, len(pts) - 1 - window)]
                node_pt = pts[-1]
            d = node_pt - inner
            norm = np.hypot(*d)
            directions[(bi, side)] = d / norm if norm > 0 else None

    partner: dict = {}
    for key, incident in ends_at.items():
        candidates = []
        for i in range(len(incident)):
            for j in range(i + 1, len(incident)):
                a, b = incident[i], incident[j]
                da, db = directions.get(a), directions.get(b)
                if da is None or db is None:
                    continue
                turn = math.degrees(math.acos(np.clip(-(da @ db), -1.0, 1.0)))
                if turn <= max_join_turn_deg:
                    candidates.append((turn, a, b))
        candidates.sort(key=lambda c: c[0])
        used = set()
        for _, a, b in candidates:
            if a in used or b in used:
                continue
            used.update((a, b))
            partner[a] = b
            partner[b] = a

    strokes: list[tuple[np.ndarray, bool]] = []
    consumed = set()

    def oriented(bi: int, enter_side: int) -> np.ndarray:
        pts = kept[bi]
        return pts if enter_side == 0 else pts[::-1]

    def walk(start: tuple[int, int]) -> tuple[np.ndarray, bool]:
        parts = []
        cur = start
        closed = False
        while True:
            bi, side = cur
            consumed.add(bi)
            pts = oriented(bi, side)
            parts.append(pts if not parts else pts[1:])
            nxt = partner.get((bi, 1 - side))
            if nxt is None:
                break
            if nxt[0] in consumed:
                closed = nxt == start
                break
            cur = nxt
        return np.vstack(parts), closed

    for bi in range(len(kept)):
        for side in (0, 1):
            if bi in consumed:
                continue
            if (bi, side) not in partner:
                strokes.append(walk((bi, side)))
    for bi in range(len(kept)):  # pairing loops with no free end
        if bi not in consumed:
            strokes.append(walk((bi, 0)))
    strokes.extend((c, True) for c in cycles)
    return strokes


def _turning_angles(
    pts_mm: np.ndarray, closed: bool, window: int
) -> tuple[np.ndarray, np.ndarray]:
    """Windowed turn angle (deg) and local arc length (mm) per vertex."""
    n = len(pts_mm)
    if n < 2 * window + 1:
        return np.zeros(0), np.zeros(0)
    if closed:
        idx = np.arange(n)
        prev = pts_mm[(idx - window) % n]
        nxt = pts_mm[(idx + window) % n]
        cur = pts_mm
    else:
        cur = pts_mm[window:n - window]
        prev = pts_mm[: n - 2 * window]
        nxt = pts_mm[2 * window:]
    v1 = cur - prev
    v2 = nxt - cur
    n1 = np.hypot(v1[:, 0], v1[:, 1])
    n2 = np.hypot(v2[:, 0], v2[:, 1])
    ok = (n1 > 0) & (n2 > 0)
    cosang = np.ones(len(cur))
    cosang[ok] = np.clip(
        (v1[ok] * v2[ok]).sum(axis=1) / (n1[ok] * n2[ok]), -1.0, 1.0
    )
    angles = np.degrees(np.arccos(cosang))
    arc = (n1 + n2) / 2.0
    return angles, arc


def _split_count(angles: np.ndarray, arc: np.ndarray, window: int) -> int:
    """Number of curvature maxima above the split threshold, at least
    ``window`` vertices apart."""
    if len(angles) == 0:
        return 0
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(arc > 0, angles / np.maximum(arc, 1e-9), 0.0)
    hot = np.nonzero(kappa > CURVATURE_SPLIT_DEG_PER_MM)[0]
    if len(hot) == 0:
        return 0
    order = hot[np.argsort(kappa[hot])[::-1]]
    accepted: list[int] = []
    for i in order:
        if all(abs(i - j) >= window for j in accepted):
            accepted.append(i)
    return len(accepted)


def estimate_static_strokes(
    image: np.ndarray, resolution: float = 10.0
) -> int:
    """Stroke count visible in a binary ink raster.

    Skeletonizes the ink, recovers pen-path-like polylines between
    skeleton endpoints and junctions (merging smooth continuations through
    junctions), and splits them wherever the windowed turn rate exceeds
    60 degrees per millimetre.  ``resolution`` is the raster's px/mm scale.
    Returns 0 for a blank image.
    """
    ink = np.asarray(image, dtype=bool)
    if ink.size == 0 or not ink.any():
        return 0
    skel = skeletonize(ink)
    window = max(2, int(round(STROKE_SPLIT_WINDOW_MM * resolution)))
    count = 0
    for pts_px, closed in _recover_strokes(skel, resolution):
        angles, arc = _turning_angles(pts_px / resolution, closed, window)
        splits = _split_count(angles, arc, window)
        count += max(1, splits) if closed else 1 + splits
    return max(count, 1)


# ---------------------------------------------------------------------------
# Fuzzy shape features
# ---------------------------------------------------------------------------


def _zone_memberships(box: np.ndarray) -> np.ndarray:
    rows = np.array_split(np.arange(box.shape[0]), N_ZONE_ROWS)
    cols = np.array_split(np.arange(box.shape[1]), N_ZONE_COLS)
    vals = np.zeros(N_ZONES)
    k = 0
    for rband in rows:
        for cband in cols:
            if len(rband) and len(cband):
                density = float(box[np.ix_(rband, cband)].mean())
            else:
                density = 0.0
            vals[k] = min(1.0, density / ZONE_DENSITY_SATURATION)
            k += 1
    return vals


def _curvature_histogram(box: np.ndarray, resolution: float) -> np.ndarray:
    skel = skeletonize(box)
    window = max(2, int(round(FEATURE_TURN_WINDOW_MM * resolution)))
    all_angles = []
    for pts_px, closed in _skeleton_paths(skel):
        angles, _ = _turning_angles(pts_px / resolution, closed, window)
        if len(angles):
            all_angles.append(angles)
    if not all_angles:
        return np.zeros(N_CURVATURE)
    angles = np.concatenate(all_angles)
    hist, _ = np.histogram(angles, bins=N_CURVATURE, range=(0.0, 180.0))
    return hist / hist.sum()


def _shape_features(box: np.ndarray, layout: GuideLines) -> np.ndarray:
    profile = box.sum(axis=1).astype(float)
    core = np.nonzero(profile >= CORE_PROFILE_FRACTION * profile.max())[0]
    core_top, core_bot = int(core.min()), int(core.max())
    core_h = max(1, core_bot - core_top + 1)
    asc_extent = core_top  # rows above the body inside the bounding box
    desc_extent = box.shape[0] - 1 - core_bot
    corpus_mm = layout.corpus_top - layout.baseline
    asc_zone = (layout.upper1 - layout.corpus_top) / corpus_mm
    desc_zone = (layout.baseline - layout.lower2) / corpus_mm
    asc = min(1.0, (asc_extent / core_h) / asc_zone)
    desc = min(1.0, (desc_extent / core_h) / desc_zone)
    wh = min(1.0, (box.shape[1] / box.shape[0]) / 3.0)
    ink_frac = float(box.mean())
    return np.array([asc, desc, wh, ink_frac])


def extract_features(
    image: np.ndarray,
    layout: GuideLines | None = None,
    resolution: float = 10.0,
) -> FeatureVector:
    """Fuzzy feature vector of a binary word image.

    Zones: ink density of a 9x5 grid over the ink bounding box, through a
    linear ramp saturating at density 0.5.  Curvature: normalized 5-bin
    histogram of windowed skeleton turn angles over [0, 180] degrees.
    Shape: ascender presence, descender presence, width/height ratio
    (clamped to [0, 3], scaled to [0, 1]) and ink fraction.  Everything is
    computed in bounding-box coordinates, so the result is invariant under
    image translation.  A blank image maps to the all-zeros vector.
    """
    ink = np.asarray(image, dtype=bool)
    if ink.size == 0 or not ink.any():
        return FeatureVector(np.zeros(N_FEATURES))
    if layout is None:
        layout = default_guides(HexGrid())
    rows, cols = np.nonzero(ink)
    box = ink[rows.min():rows.max() + 1, cols.min():cols.max() + 1]
    return FeatureVector(
        np.concatenate([
            _zone_memberships(box),
            _curvature_histogram(box, resolution),
            _shape_features(box, layout),
        ])
    )


def similarity(
    A: FeatureVector | np.ndarray,
    B: FeatureVector | np.ndarray,
    w: SimilarityWeights = SimilarityWeights(),
) -> float:
    """Fuzzy feature-contrast score in [0, 1].

    Common mass (elementwise min) against common mass plus weighted
    one-sided differences.  A zero denominator (both vectors empty) scores
    1 by the 0/0 convention.
    """
    a = A.values if isinstance(A, FeatureVector) else np.asarray(A, dtype=float)
    b = B.values if isinstance(B, FeatureVector) else np.asarray(B, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"feature vectors differ in size: {a.shape} vs {b.shape}")
    common = np.minimum(a, b).sum()
    a_only = np.maximum(a - b, 0.0).sum()
    b_only = np.maximum(b - a, 0.0).sum()
    denom = common + w.alpha * a_only + w.beta * b_only
    if denom == 0.0:
        return 1.0
    return float(common / denom)


def anova_one_way(groups: list) -> float:
    """One-way ANOVA p-value for equal group means.

    Accepts two or more groups of at least two finite values each.  The
    F statistic comes from the between/within sum-of-squares decomposition;
    the p-value from the F distribution's survival function.  Fully
    degenerate input (zero variance between and within) gives p = 1.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    for g in arrays:
        if g.ndim != 1 or len(g) < 2:
            raise ValueError("each group needs at least two values")
        if not np.all(np.isfinite(g)):
            raise ValueError("group values must be finite")
    n_total = sum(len(g) for g in arrays)
    grand = sum(g.sum() for g in arrays) / n_total
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in arrays)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in arrays)
    df_between = len(arrays) - 1
    df_within = n_total - len(arrays)
    if ss_within == 0.0:
        return 1.0 if ss_between == 0.0 else 0.0
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    return float(stats.f.sf(f_stat, df_between, df_within))


# ---------------------------------------------------------------------------
# Maturity sweep
# ---------------------------------------------------------------------------

SWEEP_HEADER = "E,mean_peaks,mean_static_strokes,sim_q1,sim_q2,sim_q3,sim_min"


@dataclass(frozen=True)
class MaturityRow:
    """Aggregated metrics for one retention level."""

    E: float
    mean_peaks: float
    mean_static_strokes: float
    sim_q1: float | None
    sim_q2: float | None
    sim_q3: float | None
    sim_min: float | None

    def as_csv(self) -> str:
        def fmt(v):
            return "" if v is None else f"{v:.6f}"

        return ",".join([
            f"{self.E:g}", f"{self.mean_peaks:.6f}",
            f"{self.mean_static_strokes:.6f}",
            fmt(self.sim_q1), fmt(self.sim_q2), fmt(self.sim_q3),
            fmt(self.sim_min),
        ])


def _sample_seeds(base_seed: int, e_index: int, sample: int) -> tuple[int, int]:
    """Stable (evolution, kinematics) seed pair for one sweep cell."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(e_index, sample))
    evo, kin = ss.generate_state(2)
    return int(evo), int(kin)


def maturity_curve(
    word: str,
    profile: WriterProfile,
    E_values: list[float],
    seeds: int,
    grid: HexGrid | None = None,
    glyphs: dict[str, GlyphPlan] | None = None,
    resolution: float = 10.0,
    dt: float = 0.005,
    vary_k_sigma: bool = True,
    collect_scores: dict | None = None,
) -> list[MaturityRow]:
    """Synthesize ``seeds`` samples of ``word`` per retention level and
    aggregate the evaluation metrics.

    Follows the evolution protocol: per E, the noise levels eps_D/eps_t
    come from ``scale_noise(E)`` and (unless ``vary_k_sigma`` is False)
    the pulse width from ``scale_k_sigma(E)``; other profile constants
    stay fixed.  Every sample is scored for velocity peaks and static
    strokes, and each group's images are compared pairwise for similarity.
    With fewer than two samples the similarity aggregates are reported as
    absent (None).

    ``collect_scores``, when given a dict, is filled with the per-E lists
    of peak counts, static counts, and pairwise scores.
    """
    from .render import InkModel, render_offline

    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    if glyphs is None or grid is None:
        lib_glyphs, lib_grid = builtin_library()
        glyphs = glyphs if glyphs is not None else lib_glyphs
        grid = grid if grid is not None else lib_grid
    guides = default_guides(grid)
    ink = InkModel()

    rows: list[MaturityRow] = []
    for i, E in enumerate(E_values):
        eps_D, eps_t = scale_noise(E)
        k_sigma = scale_k_sigma(E) if vary_k_sigma else profile.K_sigma
        peaks: list[int] = []
        statics: list[int] = []
        feats: list[FeatureVector] = []
        for s in range(seeds):
            evo_seed, kin_seed = _sample_seeds(profile.rng_seed, i, s)
            prof = replace(profile, K_sigma=k_sigma, eps_D=eps_D, eps_t=eps_t,
                           rng_seed=kin_seed)
            cfg = EvolutionConfig(E=E, rng_seed=evo_seed)
            traj = synthesize_word(word, prof, cfg, grid, glyphs, dt=dt)
            peaks.append(count_velocity_peaks(traj))
            img = render_offline(traj, ink, resolution)
            statics.append(estimate_static_strokes(img.pixels, resolution))
            feats.append(extract_features(img.pixels, guides, resolution))
        scores = [
            similarity(feats[a], feats[b])
            for a in range(seeds) for b in range(a + 1, seeds)
        ]
        if scores:
            q1, q2, q3 = np.percentile(scores, [25.0, 50.0, 75.0])
            row = MaturityRow(E, float(np.mean(peaks)), float(np.mean(statics)),
                              float(q1), float(q2), float(q3), float(min(scores)))
        else:
            row = MaturityRow(E, float(np.mean(peaks)), float(np.mean(statics)),
                              None, None, None, None)
        rows.append(row)
        if collect_scores is not None:
            collect_scores[E] = {
                "peaks": peaks, "statics": statics, "scores": scores,
            }
    return rows


def sweep_table(rows: list[MaturityRow]) -> str:
    """Delimiter-separated table with the documented header."""
    return "\n".join([SWEEP_HEADER, *(r.as_csv() for r in rows)]) + "\n"
