"""Proportion tests and reproduction of the study's summary tables.

Rendering follows the published pipeline: percentages to one decimal,
proportions to three decimals (half away from zero, computed on exact
fractions), and comparison diffs taken between the already-rounded
proportions.

Only first-round rows are independent observations, so only they carry a
defensible two-sample p-value; multi-round rows repeat choices within
subject and are annotated as not independently verifiable from the
published aggregates (the study clustered on raw subject-level data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction
from typing import Iterable, Sequence

from scipy import stats as _sstats

from .engine import RoundRecord
from .refdata import SLICES, TREATMENT_LABELS, ChoiceCounts, counts_for

VARIABLES = ("no_buy", "token_x", "token_y")

COMPARISON_METHODS = ("t_pooled", "t_unpooled", "z_pooled")


class StatsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# rounding helpers (exact fractions in, fixed-precision strings out)


def _round_fraction(value: Fraction, places: int) -> Decimal:
    quantum = Decimal(1).scaleb(-places)
    return (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
        quantum, rounding=ROUND_HALF_UP
    )


def percent_str(count: int, total: int) -> str:
    """Row percentage at one decimal, e.g. 261/480 -> "54.4"."""
    if total <= 0:
        raise StatsError("total must be positive")
    return str(_round_fraction(Fraction(count * 100, total), 1))


def proportion_decimal(count: int, total: int) -> Decimal:
    """Proportion rounded to three decimals as an exact Decimal."""
    if total <= 0:
        raise StatsError("total must be positive")
    return _round_fraction(Fraction(count, total), 3)


def proportions(counts: ChoiceCounts) -> tuple[float, float, float]:
    """Raw shares (no_buy, token_x, token_y)."""
    if counts.total <= 0:
        raise StatsError("total must be positive")
    return (counts.no_buy / counts.total, counts.token_x / counts.total,
            counts.token_y / counts.total)


def percent_row(counts: ChoiceCounts) -> tuple[str, str, str]:
    """Rendered percentage cells; Token Y shows "--" when never chosen."""
    nb = percent_str(counts.no_buy, counts.total)
    tx = percent_str(counts.token_x, counts.total)
    ty = "--" if counts.token_y == 0 else percent_str(counts.token_y, counts.total)
    return nb, tx, ty


# ---------------------------------------------------------------------------
# two-sample machinery


@dataclass(frozen=True)
class ComparisonResult:
    group1: str
    group2: str
    p1: float
    p2: float
    diff: float
    p_two: float
    p_left: float
    p_right: float
    method: str

    def one_line(self) -> str:
        return (f"{self.group1} vs {self.group2}: diff={self.diff:+.3f} "
                f"p2={self.p_two:.3f} pl={self.p_left:.3f} pr={self.p_right:.3f}")


def _finish(group1, group2, p1, p2, t, df, method) -> ComparisonResult:
    if math.isinf(t):
        p_right = 0.0 if t > 0 else 1.0
        p_two = 0.0
    elif df is None:  # normal reference
        p_right = float(_sstats.norm.sf(t))
        p_two = float(2 * _sstats.norm.sf(abs(t)))
    else:
        p_right = float(_sstats.t.sf(t, df))
        p_two = float(2 * _sstats.t.sf(abs(t), df))
    return ComparisonResult(group1, group2, p1, p2, p1 - p2,
                            min(p_two, 1.0), 1.0 - p_right, p_right, method)


def two_proportion_test(
    c1: int, n1: int, c2: int, n2: int,
    method: str = "t_pooled",
    group1: str = "group1", group2: str = "group2",
) -> ComparisonResult:
    """Difference of proportions with two-sided and directional p-values.

    methods:
      t_pooled    two-sample Student t on the 0/1 indicators (pooled sample
                  variance, df = n1+n2-2); reproduces the study's
                  first-round p-values
      t_unpooled  unpooled (Welch-style) standard error, df = n1+n2-2
      z_pooled    classic pooled two-proportion z test

    p_right = P(statistic >= t): small when group1 > group2 is hard to
    explain away. p_left = 1 - p_right.
    """
    if n1 <= 0 or n2 <= 0:
        raise StatsError("both group sizes must be positive")
    if not (0 <= c1 <= n1 and 0 <= c2 <= n2):
        raise StatsError("counts must lie within their group sizes")
    if method not in COMPARISON_METHODS:
        raise StatsError(f"unknown method {method!r}")
    p1, p2 = c1 / n1, c2 / n2
    diff = p1 - p2

    if method == "z_pooled":
        pooled = (c1 + c2) / (n1 + n2)
        var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
        df = None
    elif method == "t_unpooled":
        var = (p1 * (1 - p1) * n1 / (n1 - 1)) / n1 + (p2 * (1 - p2) * n2 / (n2 - 1)) / n2
        df = n1 + n2 - 2
    else:
        df = n1 + n2 - 2
        s2 = (n1 * p1 * (1 - p1) + n2 * p2 * (1 - p2)) / df
        var = s2 * (1 / n1 + 1 / n2)

    if var <= 0:
        t = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    else:
        t = diff / math.sqrt(var)
    return _finish(group1, group2, p1, p2, t, df, method)


def permutation_two_proportion(c1: int, n1: int, c2: int, n2: int) -> tuple[float, float]:
    """Exact label-permutation test: (two-sided p, one-sided p for group1 > group2).

    Conditions on the total number of successes (hypergeometric null); the
    two-sided region is |diff| >= |observed|, including the observed atom,
    so small samples make it conservative relative to the t approximation.
    """
    if n1 <= 0 or n2 <= 0:
        raise StatsError("both group sizes must be positive")
    successes, total = c1 + c2, n1 + n2
    obs = Fraction(c1, n1) - Fraction(c2, n2)
    rv = _sstats.hypergeom(total, successes, n1)
    p_two = p_right = 0.0
    for x in range(max(0, successes - n2), min(n1, successes) + 1):
        d = Fraction(x, n1) - Fraction(successes - x, n2)
        weight = float(rv.pmf(x))
        if abs(d) >= abs(obs):
            p_two += weight
        if d >= obs:
            p_right += weight
    return min(p_two, 1.0), min(p_right, 1.0)


def clustered_comparison(
    means1: Sequence[float], means2: Sequence[float],
    group1: str = "group1", group2: str = "group2",
) -> ComparisonResult:
    """Welch t-test on per-subject mean shares (>= 2 clusters per side)."""
    if len(means1) < 2 or len(means2) < 2:
        raise StatsError("clustered comparison needs at least 2 subjects per side")
    m1 = sum(means1) / len(means1)
    m2 = sum(means2) / len(means2)
    v1 = sum((x - m1) ** 2 for x in means1) / (len(means1) - 1)
    v2 = sum((x - m2) ** 2 for x in means2) / (len(means2) - 1)
    se2 = v1 / len(means1) + v2 / len(means2)
    if se2 == 0:
        t = 0.0 if m1 == m2 else math.copysign(math.inf, m1 - m2)
        df = len(means1) + len(means2) - 2
    else:
        t = (m1 - m2) / math.sqrt(se2)
        df = se2 ** 2 / (
            (v1 / len(means1)) ** 2 / (len(means1) - 1)
            + (v2 / len(means2)) ** 2 / (len(means2) - 1)
        )
    return _finish(group1, group2, m1, m2, t, df, "welch_cluster")


# ---------------------------------------------------------------------------
# tabulation of simulated logs


def _slice_of(record: RoundRecord) -> str:
    return "rounds1_10" if record.part == 1 else "rounds11_20"


def tabulate_records(records: Iterable[RoundRecord]) -> list[ChoiceCounts]:
    """Aggregate a choice log into the reference-data cell layout."""
    buckets: dict[tuple[str, str, int | None], dict[str, int]] = {}

    def bump(treatment: str, slice_name: str, degree: int | None, action: str) -> None:
        key = (treatment, slice_name, degree)
        bucket = buckets.setdefault(key, {v: 0 for v in VARIABLES})
        bucket[action] += 1

    for r in records:
        slices = [_slice_of(r), "all"]
        if r.part == 1 and r.round == 1:
            slices.append("round1")
        for s in slices:
            bump(r.treatment, s, None, r.action)
            bump(r.treatment, s, r.degree, r.action)

    out = []
    for (treatment, slice_name, degree) in sorted(
        buckets, key=lambda k: (k[0], SLICES.index(k[1]), k[2] or 0)
    ):
        b = buckets[(treatment, slice_name, degree)]
        out.append(ChoiceCounts(
            treatment=treatment, slice=slice_name, degree=degree,
            no_buy=b["no_buy"], token_x=b["token_x"], token_y=b["token_y"],
            total=sum(b.values()),
        ))
    return out


def subject_means(
    records: Iterable[RoundRecord], treatment: str, variable: str,
    slice_name: str = "all",
) -> list[float]:
    """Per-subject share of `variable` choices within one treatment."""
    hits: dict[tuple[str, int, str], list[int]] = {}
    for r in records:
        if r.treatment != treatment:
            continue
        if slice_name != "all" and _slice_of(r) != slice_name:
            continue
        key = (r.session_id, r.group_id, r.position)
        hits.setdefault(key, []).append(1 if r.action == variable else 0)
    return [sum(v) / len(v) for _, v in sorted(hits.items())]


# ---------------------------------------------------------------------------
# table reproduction


@dataclass(frozen=True)
class ComparisonRow:
    table: str
    block: str
    period: str
    condition: str
    variable: str
    counts1: ChoiceCounts
    counts2: ChoiceCounts
    independent: bool

    def computed(self, method: str = "t_pooled") -> ComparisonResult:
        return two_proportion_test(
            self.counts1.count(self.variable), self.counts1.total,
            self.counts2.count(self.variable), self.counts2.total,
            method=method, group1=self.condition, group2=self.variable,
        )

    def rendered(self, method: str = "t_pooled") -> dict:
        """Printed-precision cells plus p-values and the clustering caveat."""
        p1 = proportion_decimal(self.counts1.count(self.variable), self.counts1.total)
        p2 = proportion_decimal(self.counts2.count(self.variable), self.counts2.total)
        result = self.computed(method)
        return {
            "table": self.table,
            "block": self.block,
            "period": self.period,
            "condition": self.condition,
            "variable": self.variable,
            "group1": str(p1),
            "group2": str(p2),
            "diff": f"{p1 - p2:.3f}",
            "p_two": f"{result.p_two:.3f}",
            "p_left": f"{result.p_left:.3f}",
            "p_right": f"{result.p_right:.3f}",
            "note": "" if self.independent else "not independently verifiable",
        }


_PERIOD_SLICES = (
    ("Period 1", "round1"),
    ("Part 1", "rounds1_10"),
    ("Part 2", "rounds11_20"),
    ("All", "all"),
)


def comparison_rows(table: str, degree: int | None) -> list[ComparisonRow]:
    """Row layout shared by the aggregate and the three by-degree test tables."""
    rows: list[ComparisonRow] = []

    def cc(treatment: str, slice_name: str) -> ChoiceCounts:
        return counts_for(treatment, slice_name, degree)

    for period, slice_name in _PERIOD_SLICES:
        independent = slice_name == "round1"
        for condition, base, dec in (("Individual", "bas-ind", "dec-ind"),
                                     ("Network", "bas-net", "dec-net")):
            for variable in ("no_buy", "token_x"):
                rows.append(ComparisonRow(
                    table, "Baseline vs Decoy", period, condition, variable,
                    cc(base, slice_name), cc(dec, slice_name), independent))

    for period, slice_name in _PERIOD_SLICES[:3]:
        independent = slice_name == "round1"
        rows.append(ComparisonRow(
            table, "Individual vs Network", period, "Baseline", "no_buy",
            cc("bas-ind", slice_name), cc("bas-net", slice_name), independent))
        for variable in ("no_buy", "token_x"):
            rows.append(ComparisonRow(
                table, "Individual vs Network", period, "Decoy", variable,
                cc("dec-ind", slice_name), cc("dec-net", slice_name), independent))

    session_pairs = (
        ("Baseline", "Ind->Net", "bas-ind", "bas-net", ("no_buy",)),
        ("Baseline", "Net->Ind", "bas-net", "bas-ind", ("no_buy",)),
        ("Decoy", "Ind->Net", "dec-ind", "dec-net", ("no_buy", "token_x")),
        ("Decoy", "Net->Ind", "dec-net", "dec-ind", ("no_buy", "token_x")),
    )
    for condition, order, first, second, variables in session_pairs:
        for variable in variables:
            rows.append(ComparisonRow(
                table, "Part 1 vs Part 2 in the same session", order, condition,
                variable, cc(first, "rounds1_10"), cc(second, "rounds11_20"), False))

    treatment_vars = (
        ("bas-ind", ("no_buy",)),
        ("bas-net", ("no_buy",)),
        ("dec-ind", ("no_buy", "token_x")),
        ("dec-net", ("no_buy", "token_x")),
    )
    for treatment, variables in treatment_vars:
        for variable in variables:
            rows.append(ComparisonRow(
                table, "Part 1 vs Part 2 in the same treatment", "", treatment,
                variable, cc(treatment, "rounds1_10"), cc(treatment, "rounds11_20"),
                False))

    return rows


_SLICE_TITLES = {
    "round1": "Round 1",
    "rounds1_10": "Rounds 1-10",
    "rounds11_20": "Rounds 11-20",
    "all": "All Rounds",
}


@dataclass
class TablesReport:
    """All regenerated tables, renderable as text or CSV files."""

    percentage_tables: dict[str, list[dict]] = field(default_factory=dict)
    comparison_tables: dict[str, list[dict]] = field(default_factory=dict)

    def render_text(self) -> str:
        lines: list[str] = []
        for name, rows in self.percentage_tables.items():
            lines.append(f"== {name} ==")
            for row in rows:
                cells = "  ".join(
                    f"{k}={v}" for k, v in row.items() if k not in ("table",))
                lines.append("  " + cells)
            lines.append("")
        for name, rows in self.comparison_tables.items():
            lines.append(f"== {name} ==")
            block = None
            for row in rows:
                if row["block"] != block:
                    block = row["block"]
                    lines.append(f"  -- {block} --")
                note = f"  [{row['note']}]" if row["note"] else ""
                lines.append(
                    f"  {row['period']:9s} {row['condition']:11s} {row['variable']:8s}"
                    f" {row['group1']} {row['group2']} diff={row['diff']}"
                    f" p2={row['p_two']} pl={row['p_left']} pr={row['p_right']}{note}")
            lines.append("")
        return "\n".join(lines)

    def write_csv_files(self, outdir) -> list[str]:
        import csv
        from pathlib import Path

        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, rows in {**self.percentage_tables, **self.comparison_tables}.items():
            path = outdir / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                writer.writerows(rows)
            written.append(str(path))
        return written


def _percentage_table(degree: int | None) -> list[dict]:
    rows = []
    for slice_name in SLICES:
        for treatment in TREATMENT_LABELS:
            counts = counts_for(treatment, slice_name, degree)
            nb, tx, ty = percent_row(counts)
            rows.append({
                "slice": _SLICE_TITLES[slice_name],
                "treatment": treatment,
                "no_buy": nb,
                "token_x": tx,
                "token_y": "--" if treatment.startswith("bas") else ty,
            })
    return rows


def _counts_table(source: list[ChoiceCounts]) -> list[dict]:
    rows = []
    for counts in source:
        nb, tx, ty = percent_row(counts)
        row = {
            "slice": _SLICE_TITLES[counts.slice],
            "treatment": counts.treatment,
        }
        if counts.degree is not None:
            row["links"] = counts.degree
        row.update({
            "no_buy": f"{counts.no_buy} ({nb}%)",
            "token_x": f"{counts.token_x} ({tx}%)",
            "token_y": "--" if ty == "--" else f"{counts.token_y} ({ty}%)",
            "total": counts.total,
        })
        rows.append(row)
    return rows


def _a1_ordered() -> list[ChoiceCounts]:
    from .refdata import A1_COUNTS
    return sorted(A1_COUNTS, key=lambda c: (SLICES.index(c.slice),
                                            TREATMENT_LABELS.index(c.treatment)))


def _a2_ordered() -> list[ChoiceCounts]:
    # published layout: part, then treatment, then number of links
    from .refdata import A2_COUNTS
    order = ("rounds1_10", "rounds11_20", "all")
    return sorted(A2_COUNTS, key=lambda c: (order.index(c.slice),
                                            TREATMENT_LABELS.index(c.treatment), c.degree))


def reproduce_tables(method: str = "t_pooled") -> TablesReport:
    """Regenerate every summary table from the embedded counts."""
    report = TablesReport()
    report.percentage_tables["table1_decisions"] = _percentage_table(None)
    for degree, name in ((1, "table3_degree1"), (2, "table5_degree2"), (3, "table7_degree3")):
        report.percentage_tables[name] = _percentage_table(degree)
    report.percentage_tables["tableA1_counts"] = _counts_table(_a1_ordered())
    report.percentage_tables["tableA2_counts"] = _counts_table(_a2_ordered())

    for degree, name in ((None, "table2_tests"), (1, "table4_tests_degree1"),
                         (2, "table6_tests_degree2"), (3, "table8_tests_degree3")):
        report.comparison_tables[name] = [
            row.rendered(method) for row in comparison_rows(name, degree)
        ]
    return report
