"""Reference choice counts from the original lab study.

Two published appendix tables are embedded as absolute counts: token
decisions by part and treatment (16 rows) and by treatment, part and degree
(36 rows). The round-one-by-degree breakdown (12 rows) is reconstructed
from the study's printed round-one percentages; its rows sum exactly to the
published round-one aggregates, which the test suite verifies.

Slices: "round1" (first decision of part 1), "rounds1_10" (the treatment's
part-1 occurrences), "rounds11_20" (part 2), "all" (both parts).
"""

from __future__ import annotations

from dataclasses import dataclass

SLICES = ("round1", "rounds1_10", "rounds11_20", "all")
TREATMENT_LABELS = ("bas-ind", "bas-net", "dec-ind", "dec-net")


@dataclass(frozen=True)
class ChoiceCounts:
    """Absolute decision counts for one treatment cell."""

    treatment: str
    slice: str
    degree: int | None
    no_buy: int
    token_x: int
    token_y: int
    total: int

    def __post_init__(self) -> None:
        if self.no_buy + self.token_x + self.token_y != self.total:
            raise ValueError(f"counts do not sum to total in {self}")
        if self.treatment.startswith("bas") and self.token_y:
            raise ValueError(f"baseline cell with Token Y choices: {self}")
        if self.slice not in SLICES:
            raise ValueError(f"unknown slice {self.slice!r}")

    def count(self, variable: str) -> int:
        return {"no_buy": self.no_buy, "token_x": self.token_x,
                "token_y": self.token_y}[variable]


def _rows(slice_name, degree, data):
    return tuple(
        ChoiceCounts(treatment, slice_name, degree, nb, tx, ty, total)
        for treatment, (nb, tx, ty, total) in data.items()
    )


# Token decisions by part and treatment (aggregate appendix table).
A1_COUNTS: tuple[ChoiceCounts, ...] = (
    _rows("round1", None, {
        "bas-ind": (27, 21, 0, 48),
        "bas-net": (44, 58, 0, 102),
        "dec-ind": (23, 23, 2, 48),
        "dec-net": (36, 39, 15, 90),
    })
    + _rows("rounds1_10", None, {
        "bas-ind": (261, 219, 0, 480),
        "bas-net": (548, 472, 0, 1020),
        "dec-ind": (225, 237, 18, 480),
        "dec-net": (409, 393, 98, 900),
    })
    + _rows("rounds11_20", None, {
        "bas-ind": (379, 641, 0, 1020),
        "bas-net": (260, 220, 0, 480),
        "dec-ind": (264, 572, 64, 900),
        "dec-net": (224, 229, 27, 480),
    })
    + _rows("all", None, {
        "bas-ind": (640, 860, 0, 1500),
        "bas-net": (808, 692, 0, 1500),
        "dec-ind": (489, 809, 82, 1380),
        "dec-net": (633, 622, 125, 1380),
    })
)

# Token decisions by treatment, part and number of links (appendix table).
A2_COUNTS: tuple[ChoiceCounts, ...] = (
    # part 1 (rounds 1-10)
    _rows("rounds1_10", 1, {
        "bas-ind": (126, 34, 0, 160),
        "bas-net": (221, 119, 0, 340),
        "dec-ind": (118, 41, 1, 160),
        "dec-net": (168, 112, 20, 300),
    })
    + _rows("rounds1_10", 2, {
        "bas-ind": (77, 83, 0, 160),
        "bas-net": (178, 162, 0, 340),
        "dec-ind": (64, 85, 11, 160),
        "dec-net": (138, 130, 32, 300),
    })
    + _rows("rounds1_10", 3, {
        "bas-ind": (58, 102, 0, 160),
        "bas-net": (149, 191, 0, 340),
        "dec-ind": (43, 111, 6, 160),
        "dec-net": (103, 151, 46, 300),
    })
    # part 2 (rounds 11-20)
    + _rows("rounds11_20", 1, {
        "bas-ind": (176, 164, 0, 340),
        "bas-net": (120, 40, 0, 160),
        "dec-ind": (108, 175, 17, 300),
        "dec-net": (102, 58, 0, 160),
    })
    + _rows("rounds11_20", 2, {
        "bas-ind": (130, 210, 0, 340),
        "bas-net": (98, 62, 0, 160),
        "dec-ind": (102, 176, 22, 300),
        "dec-net": (63, 83, 14, 160),
    })
    + _rows("rounds11_20", 3, {
        "bas-ind": (73, 267, 0, 340),
        "bas-net": (42, 118, 0, 160),
        "dec-ind": (54, 221, 25, 300),
        "dec-net": (59, 88, 13, 160),
    })
    # both parts
    + _rows("all", 1, {
        "bas-ind": (302, 198, 0, 500),
        "bas-net": (341, 159, 0, 500),
        "dec-ind": (226, 216, 18, 460),
        "dec-net": (270, 170, 20, 460),
    })
    + _rows("all", 2, {
        "bas-ind": (207, 293, 0, 500),
        "bas-net": (276, 224, 0, 500),
        "dec-ind": (166, 261, 33, 460),
        "dec-net": (201, 213, 46, 460),
    })
    + _rows("all", 3, {
        "bas-ind": (131, 369, 0, 500),
        "bas-net": (191, 309, 0, 500),
        "dec-ind": (97, 332, 31, 460),
        "dec-net": (162, 239, 59, 460),
    })
)

# First-round decisions split by degree, reconstructed from the printed
# round-one percentage rows; sums match the aggregate round-one counts.
ROUND1_DEGREE_COUNTS: tuple[ChoiceCounts, ...] = (
    _rows("round1", 1, {
        "bas-ind": (13, 3, 0, 16),
        "bas-net": (22, 12, 0, 34),
        "dec-ind": (12, 4, 0, 16),
        "dec-net": (15, 13, 2, 30),
    })
    + _rows("round1", 2, {
        "bas-ind": (8, 8, 0, 16),
        "bas-net": (17, 17, 0, 34),
        "dec-ind": (8, 7, 1, 16),
        "dec-net": (10, 15, 5, 30),
    })
    + _rows("round1", 3, {
        "bas-ind": (6, 10, 0, 16),
        "bas-net": (5, 29, 0, 34),
        "dec-ind": (3, 12, 1, 16),
        "dec-net": (11, 11, 8, 30),
    })
)


def reference_counts() -> list[ChoiceCounts]:
    """The embedded published dataset (16 aggregate + 36 by-degree rows)."""
    return list(A1_COUNTS) + list(A2_COUNTS)


def round1_degree_counts() -> list[ChoiceCounts]:
    return list(ROUND1_DEGREE_COUNTS)


def counts_for(treatment: str, slice_name: str, degree: int | None = None) -> ChoiceCounts:
    pool = A1_COUNTS if degree is None else (A2_COUNTS + ROUND1_DEGREE_COUNTS)
    for row in pool:
        if row.treatment == treatment and row.slice == slice_name and row.degree == degree:
            return row
    raise KeyError(f"no reference counts for ({treatment}, {slice_name}, degree={degree})")
