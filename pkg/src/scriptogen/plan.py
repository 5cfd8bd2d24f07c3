"""Effector-independent layer: hexagonal grid, glyph plans, word plans.

A glyph is an ordered walk over nodes of an offset-hexagonal grid (odd rows
shifted right by half a pitch, rows pitch*sqrt(3)/2 apart).  Words are built
by translating each glyph's walk rightwards and joining glyphs with a pen-up
transition.  Plan points that sit on one of the worksheet guide lines are
tagged so the evolution stage can protect them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import GlyphFileError, MissingGlyphError

GLYPH_FORMAT_HEADER = "scriptogen-glyphs v1"

# Guide-line tags a plan point may carry.
GUIDE_TAGS = ("upper1", "upper2", "lower1", "lower2")

ROW_SPACING_FACTOR = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class HexGrid:
    """Offset-hexagonal node lattice.

    Node ``i`` sits at row ``i // n_cols``, column ``i % n_cols``.  Odd rows
    are shifted right by ``pitch / 2``; rows are ``pitch * sqrt(3)/2`` apart.
    """

    n_cols: int = 12
    n_rows: int = 9
    pitch: float = 2.5
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.n_cols < 1 or self.n_rows < 1:
            raise ValueError("grid must have at least one column and row")
        if self.pitch <= 0.0:
            raise ValueError("pitch must be positive")

    @property
    def n_nodes(self) -> int:
        return self.n_cols * self.n_rows

    @property
    def row_spacing(self) -> float:
        return self.pitch * ROW_SPACING_FACTOR


def grid_node_position(grid: HexGrid, index: int) -> tuple[float, float]:
    """Millimetre coordinates of grid node ``index``."""
    if not (0 <= index < grid.n_nodes):
        raise IndexError(
            f"node index {index} out of range for {grid.n_cols}x{grid.n_rows} grid"
        )
    row, col = divmod(index, grid.n_cols)
    x = grid.origin[0] + col * grid.pitch + (grid.pitch / 2.0 if row % 2 else 0.0)
    y = grid.origin[1] + row * grid.row_spacing
    return (x, y)


@dataclass(frozen=True)
class GuideLines:
    """Worksheet line heights (mm), bottom to top:
    lower2 < lower1 < baseline < corpus_top < upper2 < upper1.
    """

    lower2: float
    lower1: float
    baseline: float
    corpus_top: float
    upper2: float
    upper1: float

    def __post_init__(self) -> None:
        ys = (self.lower2, self.lower1, self.baseline, self.corpus_top,
              self.upper2, self.upper1)
        if not all(a < b for a, b in zip(ys, ys[1:])):
            raise ValueError(f"guide lines must be strictly increasing, got {ys}")

    def tagged_lines(self) -> dict[str, float]:
        return {
            "upper1": self.upper1,
            "upper2": self.upper2,
            "lower1": self.lower1,
            "lower2": self.lower2,
        }


def default_guides(
    grid: HexGrid, baseline_row: int = 2, corpus_rows: int = 3
) -> GuideLines:
    """Guide lines for glyphs authored on ``grid``.

    The letter body spans ``corpus_rows`` row gaps starting at
    ``baseline_row``.  The visible ruling lines that children write against
    sit an eighth of a pitch outside the body (so body-row nodes fall within
    the pitch/4 tagging tolerance of lower1/upper2), while the ascender top
    and descender bottom lines lie on grid rows of their own.
    """
    h = grid.row_spacing
    baseline = grid.origin[1] + baseline_row * h
    corpus_top = baseline + corpus_rows * h
    return GuideLines(
        lower2=baseline - 2.0 * h,
        lower1=baseline - grid.pitch / 8.0,
        baseline=baseline,
        corpus_top=corpus_top,
        upper2=corpus_top + grid.pitch / 8.0,
        upper1=corpus_top + 2.0 * h,
    )


@dataclass(frozen=True)
class GlyphPlan:
    """Ordered node walk for one character.

    ``pen_down[i]`` says whether the pen touches the paper between
    ``nodes[i]`` and ``nodes[i + 1]``.
    """

    letter: str
    nodes: tuple[int, ...]
    pen_down: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.letter) != 1:
            raise ValueError(f"glyph letter must be a single character: {self.letter!r}")
        if len(self.nodes) < 6:
            raise ValueError(
                f"glyph {self.letter!r} needs at least 6 nodes, has {len(self.nodes)}"
            )
        if len(self.pen_down) != len(self.nodes) - 1:
            raise ValueError(
                f"glyph {self.letter!r}: need {len(self.nodes) - 1} pen flags, "
                f"got {len(self.pen_down)}"
            )

    def validate_on(self, grid: HexGrid) -> None:
        """Check node indices and non-zero pen-down displacements on ``grid``."""
        for n in self.nodes:
            if not (0 <= n < grid.n_nodes):
                raise ValueError(
                    f"glyph {self.letter!r}: node {n} outside "
                    f"{grid.n_cols}x{grid.n_rows} grid"
                )
        for i, down in enumerate(self.pen_down):
            if down and self.nodes[i] == self.nodes[i + 1]:
                raise ValueError(
                    f"glyph {self.letter!r}: zero-length pen-down step at {i}"
                )


@dataclass(frozen=True)
class TrajectoryPlan:
    """Concrete point sequence a writer must pass through.

    Attributes:
        points: (n, 2) array of millimetre targets.
        pen_down: length n-1 flags for each consecutive pair.
        tags: per-point guide-line tag, one of GUIDE_TAGS or None.
        glyph_ids: per-point index of the originating glyph in the word.
        letters: letter of each glyph id, for diagnostics.
    """

    points: np.ndarray
    pen_down: tuple[bool, ...]
    tags: tuple[str | None, ...]
    glyph_ids: tuple[int, ...]
    letters: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        object.__setattr__(self, "points", pts)
        n = len(pts)
        if n < 1:
            raise ValueError("plan needs at least one point")
        if len(self.pen_down) != n - 1:
            raise ValueError(f"need {n - 1} pen flags, got {len(self.pen_down)}")
        if len(self.tags) != n or len(self.glyph_ids) != n:
            raise ValueError("tags and glyph_ids must have one entry per point")

    @property
    def n_sl(self) -> int:
        return len(self.points)

    def glyph_letter(self, glyph_id: int) -> str:
        if 0 <= glyph_id < len(self.letters):
            return self.letters[glyph_id]
        return "?"

    def pen_down_runs(self) -> list[tuple[int, int]]:
        """Maximal index ranges [start, stop) joined by pen-down steps."""
        runs: list[tuple[int, int]] = []
        start = 0
        for i, down in enumerate(self.pen_down):
            if not down:
                runs.append((start, i + 1))
                start = i + 1
        runs.append((start, self.n_sl))
        return runs


def _tag_for(y: float, guides: GuideLines, tolerance: float) -> str | None:
    best: str | None = None
    best_dist = tolerance
    for name, line_y in guides.tagged_lines().items():
        d = abs(y - line_y)
        if d <= best_dist:
            best = name
            best_dist = d
    return best


def glyph_points(glyph: GlyphPlan, grid: HexGrid) -> np.ndarray:
    """(n, 2) millimetre coordinates of a glyph's walk."""
    return np.array([grid_node_position(grid, n) for n in glyph.nodes])


def glyph_width(glyph: GlyphPlan, grid: HexGrid) -> float:
    pts = glyph_points(glyph, grid)
    return float(pts[:, 0].max() - pts[:, 0].min())


def build_word_plan(
    word: str,
    glyphs: dict[str, GlyphPlan],
    grid: HexGrid,
    letter_advance: float | None = None,
    guides: GuideLines | None = None,
) -> TrajectoryPlan:
    """Concatenate glyph walks into a word plan.

    Each successive glyph is translated right by ``letter_advance`` mm, or,
    when None, by the previous glyph's bounding-box width plus one pitch.
    A pen-up transition joins glyphs.  Points within pitch/4 of a guide
    line get that line's tag.

    Raises:
        MissingGlyphError: some character of ``word`` has no glyph.
    """
    if not word:
        raise ValueError("word must be non-empty")
    missing = sorted({ch for ch in word if ch not in glyphs})
    if missing:
        raise MissingGlyphError(
            f"no glyph plan for character(s): {', '.join(repr(c) for c in missing)}"
        )
    if guides is None:
        guides = default_guides(grid)

    tolerance = grid.pitch / 4.0
    all_points: list[np.ndarray] = []
    pen: list[bool] = []
    glyph_ids: list[int] = []
    letters: list[str] = []
    x_cursor = 0.0
    for gi, ch in enumerate(word):
        glyph = glyphs[ch]
        pts = glyph_points(glyph, grid)
        pts[:, 0] += x_cursor
        if gi > 0:
            pen.append(False)  # pen-up hop from the previous glyph
        pen.extend(glyph.pen_down)
        all_points.append(pts)
        glyph_ids.extend([gi] * len(pts))
        letters.append(ch)
        advance = (
            letter_advance
            if letter_advance is not None
            else glyph_width(glyph, grid) + grid.pitch
        )
        x_cursor += advance

    points = np.vstack(all_points)
    tags = tuple(_tag_for(y, guides, tolerance) for y in points[:, 1])
    return TrajectoryPlan(
        points=points,
        pen_down=tuple(pen),
        tags=tags,
        glyph_ids=tuple(glyph_ids),
        letters=tuple(letters),
    )


# ---------------------------------------------------------------------------
# Glyph library file format
#
#   scriptogen-glyphs v1
#   grid 12 9 2.5
#   glyph a
#     nodes 63 62 61 ...
#     pen   1 1 1 ...
#   end
#
# '#' starts a comment.  The grid line is optional (defaults shown above).
# A missing pen line means every step is pen-down.
# ---------------------------------------------------------------------------


def dump_glyph_library(
    glyphs: dict[str, GlyphPlan], grid: HexGrid, path: str | Path
) -> None:
    """Write a glyph library in the versioned text format."""
    lines = [GLYPH_FORMAT_HEADER,
             f"grid {grid.n_cols} {grid.n_rows} {grid.pitch:g}"]
    for letter in sorted(glyphs):
        g = glyphs[letter]
        lines.append(f"glyph {letter}")
        lines.append("  nodes " + " ".join(str(n) for n in g.nodes))
        lines.append("  pen   " + " ".join("1" if d else "0" for d in g.pen_down))
        lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_glyph_library(text: str) -> tuple[dict[str, GlyphPlan], HexGrid]:
    """Parse the text format; returns the glyph map and its grid."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != GLYPH_FORMAT_HEADER:
        raise GlyphFileError(
            f"missing or unsupported header; expected {GLYPH_FORMAT_HEADER!r}"
        )
    grid = HexGrid()
    glyphs: dict[str, GlyphPlan] = {}
    letter: str | None = None
    nodes: list[int] = []
    pen: list[bool] | None = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0]
        try:
            if kind == "grid":
                grid = HexGrid(int(fields[1]), int(fields[2]), float(fields[3]))
            elif kind == "glyph":
                if letter is not None:
                    raise GlyphFileError(f"line {lineno}: nested glyph record")
                letter = fields[1]
                nodes, pen = [], None
            elif kind == "nodes":
                nodes = [int(f) for f in fields[1:]]
            elif kind == "pen":
                pen = [f == "1" for f in fields[1:]]
            elif kind == "end":
                if letter is None:
                    raise GlyphFileError(f"line {lineno}: 'end' outside glyph record")
                if pen is None:
                    pen = [True] * (len(nodes) - 1)
                glyphs[letter] = GlyphPlan(letter, tuple(nodes), tuple(pen))
                letter = None
            else:
                raise GlyphFileError(f"line {lineno}: unknown directive {kind!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, GlyphFileError):
                raise
            raise GlyphFileError(f"line {lineno}: {exc}") from exc
    if letter is not None:
        raise GlyphFileError(f"unterminated glyph record for {letter!r}")
    for g in glyphs.values():
        g.validate_on(grid)
    return glyphs, grid


def load_glyph_library(path: str | Path) -> tuple[dict[str, GlyphPlan], HexGrid]:
    return parse_glyph_library(Path(path).read_text(encoding="utf-8"))


def builtin_library() -> tuple[dict[str, GlyphPlan], HexGrid]:
    """The glyph library shipped with the package."""
    text = (resources.files("scriptogen") / "data" / "default.glyphs").read_text(
        encoding="utf-8"
    )
    return parse_glyph_library(text)
