"""File formats: certificates, bundles, schedules, condition reports, tables.

All documents are JSON with a ``format`` tag.  Integers that may exceed any
consumer's native size (exponents, bases, exact rational sums) are written as
decimal strings; floats rely on ``repr`` round-tripping, so a load followed by
a save reproduces the bytes exactly.  Unknown fields are ignored with a
warning to stay forward compatible.

Writes are atomic (temp file in the target directory, then rename).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from gmpy2 import mpz

from .errors import FileFormatError
from .frequencies import ConditionReport, ExactRatio, FreqSchedule
from .norms import NormReport, ScanTable
from .poly import SparsePoly
from .rudin_shapiro import BoundsRecord

log = logging.getLogger("bidisc")

PathLike = Union[str, Path]

_BUNDLE_FORMAT = "bidisc-bundle/1"
_SCHEDULE_FORMAT = "bidisc-schedule/1"
_CONDITIONS_FORMAT = "bidisc-conditions/1"
_CERT_FORMAT = "bidisc-poly/1"


def _int_str(value: int) -> str:
    # mpz digits: immune to CPython's int->str conversion size limit
    return mpz(value).digits()


def _str_int(text: str) -> int:
    try:
        return int(mpz(text))
    except ValueError as exc:
        raise FileFormatError(f"bad integer string {text!r}") from exc


def atomic_write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _dump(obj: object) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def _load_json(path: PathLike) -> dict:
    try:
        with open(path, "r") as handle:
            obj = json.load(handle)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError, ValueError) as exc:
        raise FileFormatError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise FileFormatError(f"{path}: expected a JSON object")
    return obj


def _take(obj: dict, path: PathLike, known: set[str]) -> None:
    unknown = set(obj) - known
    for key in sorted(unknown):
        log.warning("%s: ignoring unknown field %r", path, key)


def _require(obj: dict, key: str, path: PathLike) -> object:
    if key not in obj:
        raise FileFormatError(f"{path}: missing required field {key!r}")
    return obj[key]


# -- dyadic kappa -------------------------------------------------------------

_KAPPA_RE = re.compile(r"^(\d+)/2\^(\d+)$")


def kappa_to_str(kappa: Fraction, bits: int) -> str:
    scale = (1 << bits) // kappa.denominator
    if kappa.denominator * scale != (1 << bits):
        raise ValueError(f"kappa {kappa} is not dyadic with {bits} bits")
    return f"{kappa.numerator * scale}/2^{bits}"


def kappa_from_str(text: str) -> tuple[Fraction, int]:
    match = _KAPPA_RE.match(text)
    if not match:
        raise FileFormatError(f"bad kappa string {text!r}")
    num, bits = int(match.group(1)), int(match.group(2))
    return Fraction(num, 1 << bits), bits


# -- polynomial certificates ---------------------------------------------------

def poly_to_obj(p: SparsePoly) -> dict:
    return {
        "format": _CERT_FORMAT,
        "vars": 2,
        "analytic": p.analytic,
        "terms": [
            {"e": [_int_str(m1), _int_str(m2)], "c": [c.real, c.imag]}
            for (m1, m2), c in p.iter_terms()
        ],
    }


def poly_from_obj(obj: dict, path: PathLike = "<memory>") -> SparsePoly:
    _take(obj, path, {"format", "vars", "analytic", "terms"})
    if _require(obj, "vars", path) != 2:
        raise FileFormatError(f"{path}: only bivariate certificates are supported")
    analytic = bool(_require(obj, "analytic", path))
    terms = []
    for rec in _require(obj, "terms", path):
        try:
            e = rec["e"]
            c = rec["c"]
            terms.append(((_str_int(e[0]), _str_int(e[1])), complex(c[0], c[1])))
        except (KeyError, IndexError, TypeError) as exc:
            raise FileFormatError(f"{path}: malformed term record {rec!r}") from exc
    try:
        return SparsePoly(terms, analytic=analytic)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def save_certificate(p: SparsePoly, path: PathLike) -> None:
    atomic_write_text(path, _dump(poly_to_obj(p)))


def load_certificate(path: PathLike) -> SparsePoly:
    return poly_from_obj(_load_json(path), path)


# -- frequency schedules -------------------------------------------------------

def schedule_to_obj(sched: FreqSchedule, kappa_bits: int) -> dict:
    return {
        "format": _SCHEDULE_FORMAT,
        "n": sched.n,
        "mode": sched.mode,
        "base": _int_str(sched.base),
        "kappa": kappa_to_str(sched.kappa, kappa_bits),
        "A": list(sched.A),
        "freqs": [[_int_str(f1), _int_str(f2)] for f1, f2 in sched.freqs],
    }


def schedule_from_obj(obj: dict, path: PathLike = "<memory>") -> tuple[FreqSchedule, int]:
    _take(obj, path, {"format", "n", "mode", "base", "kappa", "A", "freqs"})
    kappa, bits = kappa_from_str(str(_require(obj, "kappa", path)))
    try:
        sched = FreqSchedule(
            n=int(_require(obj, "n", path)),
            freqs=tuple(
                (_str_int(f[0]), _str_int(f[1])) for f in _require(obj, "freqs", path)
            ),
            kappa=kappa,
            A=tuple(int(k) for k in _require(obj, "A", path)),
            base=_str_int(str(_require(obj, "base", path))),
            mode=str(_require(obj, "mode", path)),
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed schedule: {exc}") from exc
    return sched, bits


def save_schedule(sched: FreqSchedule, kappa_bits: int, path: PathLike) -> None:
    atomic_write_text(path, _dump(schedule_to_obj(sched, kappa_bits)))


def load_schedule(path: PathLike) -> tuple[FreqSchedule, int]:
    return schedule_from_obj(_load_json(path), path)


# -- condition reports ----------------------------------------------------------

def conditions_to_obj(report: ConditionReport) -> dict:
    return {
        "format": _CONDITIONS_FORMAT,
        "passed": report.passed,
        "iv_ok": report.iv_ok,
        "ratio_le_one": report.ratio_le_one,
        "counts": dict(report.counts),
        "sum_i": report.sum_i.as_string(),
        "sum_ii": report.sum_ii.as_string(),
        "sum_iii": report.sum_iii.as_string(),
        "sum_i_float": float(report.sum_i),
        "sum_ii_float": float(report.sum_ii),
        "sum_iii_float": float(report.sum_iii),
    }


def conditions_from_obj(obj: dict, path: PathLike = "<memory>") -> ConditionReport:
    _take(obj, path, {"format", "passed", "iv_ok", "ratio_le_one", "counts",
                      "sum_i", "sum_ii", "sum_iii",
                      "sum_i_float", "sum_ii_float", "sum_iii_float"})
    try:
        return ConditionReport(
            sum_i=ExactRatio.from_string(str(_require(obj, "sum_i", path))),
            sum_ii=ExactRatio.from_string(str(_require(obj, "sum_ii", path))),
            sum_iii=ExactRatio.from_string(str(_require(obj, "sum_iii", path))),
            iv_ok=bool(_require(obj, "iv_ok", path)),
            ratio_le_one=bool(_require(obj, "ratio_le_one", path)),
            passed=bool(_require(obj, "passed", path)),
            counts={str(k): int(v) for k, v in _require(obj, "counts", path).items()},
        )
    except (TypeError, AttributeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed condition report: {exc}") from exc


def save_conditions(report: ConditionReport, path: PathLike) -> None:
    atomic_write_text(path, _dump(conditions_to_obj(report)))


def load_conditions(path: PathLike) -> ConditionReport:
    return conditions_from_obj(_load_json(path), path)


# -- bundles ---------------------------------------------------------------------

@dataclass(frozen=True)
class LoadedBundle:
    """A bundle file plus its resolved schedule and stored records."""

    n: int
    mode: str
    schedule_name: str
    a: tuple[float, ...]
    kappa: Fraction
    kappa_bits: int
    A: tuple[int, ...]
    branch: Optional[str]
    achieved: float
    total: float
    bounds: BoundsRecord
    f_source: SparsePoly
    g_source: SparsePoly
    schedule: FreqSchedule
    schedule_path: Path
    conditions_path: Optional[Path]
    schedule_ref: str = "schedule.json"
    conditions_ref: Optional[str] = None


def bundle_to_obj(result, schedule_file: str, conditions_file: str) -> dict:
    """Serialize a pipeline ConstructionResult (duck-typed to avoid a cycle)."""
    bounds = result.bundle.bounds
    return {
        "format": _BUNDLE_FORMAT,
        "n": result.schedule.n,
        "mode": result.freqs.mode,
        "schedule_name": result.schedule.name,
        "a": list(result.schedule.a),
        "kappa": kappa_to_str(result.bundle.kappa, result.kappa_bits),
        "A": list(result.selection.A),
        "branch": result.selection.branch,
        "selection": {"achieved": result.selection.achieved,
                      "total": result.selection.total},
        "bounds": {
            "upper_pure1": bounds.upper_pure1,
            "upper_pure2": bounds.upper_pure2,
            "mixed_at_1_f": [bounds.mixed_at_1_f.real, bounds.mixed_at_1_f.imag],
            "mixed_at_1_g": [bounds.mixed_at_1_g.real, bounds.mixed_at_1_g.imag],
            "chain_lower": bounds.chain_lower,
        },
        "schedule_file": schedule_file,
        "conditions_file": conditions_file,
        "f_source": poly_to_obj(result.bundle.f_source),
        "g_source": poly_to_obj(result.bundle.g_source),
    }


_BUNDLE_KEYS = {"format", "n", "mode", "schedule_name", "a", "kappa", "A",
                "branch", "selection", "bounds", "schedule_file",
                "conditions_file", "f_source", "g_source"}


def load_bundle(path: PathLike) -> LoadedBundle:
    path = Path(path)
    obj = _load_json(path)
    _take(obj, path, _BUNDLE_KEYS)
    kappa, bits = kappa_from_str(str(_require(obj, "kappa", path)))

    bounds_obj = _require(obj, "bounds", path)
    try:
        bounds = BoundsRecord(
            upper_pure1=float(bounds_obj["upper_pure1"]),
            upper_pure2=float(bounds_obj["upper_pure2"]),
            mixed_at_1_f=complex(*bounds_obj["mixed_at_1_f"]),
            mixed_at_1_g=complex(*bounds_obj["mixed_at_1_g"]),
            chain_lower=float(bounds_obj["chain_lower"]),
        )
        selection = _require(obj, "selection", path)
        achieved = float(selection["achieved"])
        total = float(selection["total"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed bounds/selection: {exc}") from exc

    schedule_path = path.parent / str(_require(obj, "schedule_file", path))
    sched, sched_bits = load_schedule(schedule_path)
    if sched.kappa != kappa:
        raise FileFormatError(
            f"{path}: bundle kappa {kappa} disagrees with schedule {sched.kappa}"
        )
    conditions_path: Optional[Path] = None
    if obj.get("conditions_file"):
        candidate = path.parent / str(obj["conditions_file"])
        if candidate.exists():
            conditions_path = candidate

    return LoadedBundle(
        n=int(_require(obj, "n", path)),
        mode=str(_require(obj, "mode", path)),
        schedule_name=str(_require(obj, "schedule_name", path)),
        a=tuple(float(x) for x in _require(obj, "a", path)),
        kappa=kappa,
        kappa_bits=bits,
        A=tuple(int(k) for k in _require(obj, "A", path)),
        branch=obj.get("branch"),
        achieved=achieved,
        total=total,
        bounds=bounds,
        f_source=poly_from_obj(_require(obj, "f_source", path), path),
        g_source=poly_from_obj(_require(obj, "g_source", path), path),
        schedule=sched,
        schedule_path=schedule_path,
        conditions_path=conditions_path,
        schedule_ref=str(_require(obj, "schedule_file", path)),
        conditions_ref=str(obj["conditions_file"]) if obj.get("conditions_file") else None,
    )


def loaded_bundle_to_obj(loaded: LoadedBundle) -> dict:
    """Rebuild the bundle document from a loaded bundle, field for field."""
    bounds = loaded.bounds
    return {
        "format": _BUNDLE_FORMAT,
        "n": loaded.n,
        "mode": loaded.mode,
        "schedule_name": loaded.schedule_name,
        "a": list(loaded.a),
        "kappa": kappa_to_str(loaded.kappa, loaded.kappa_bits),
        "A": list(loaded.A),
        "branch": loaded.branch,
        "selection": {"achieved": loaded.achieved, "total": loaded.total},
        "bounds": {
            "upper_pure1": bounds.upper_pure1,
            "upper_pure2": bounds.upper_pure2,
            "mixed_at_1_f": [bounds.mixed_at_1_f.real, bounds.mixed_at_1_f.imag],
            "mixed_at_1_g": [bounds.mixed_at_1_g.real, bounds.mixed_at_1_g.imag],
            "chain_lower": bounds.chain_lower,
        },
        "schedule_file": loaded.schedule_ref,
        "conditions_file": loaded.conditions_ref,
        "f_source": poly_to_obj(loaded.f_source),
        "g_source": poly_to_obj(loaded.g_source),
    }


def loaded_bundle_text(loaded: LoadedBundle) -> str:
    return _dump(loaded_bundle_to_obj(loaded))


def schedule_text(sched: FreqSchedule, kappa_bits: int) -> str:
    return _dump(schedule_to_obj(sched, kappa_bits))


def save_bundle(result, out_dir: PathLike, stem: str = "") -> dict[str, Path]:
    """Write bundle, schedule and condition-report files into ``out_dir``.

    Returns the paths keyed by ``bundle``, ``schedule`` and ``conditions``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = {
        "bundle": f"{stem}bundle.json",
        "schedule": f"{stem}schedule.json",
        "conditions": f"{stem}conditions.json",
    }
    save_schedule(result.freqs, result.kappa_bits, out / names["schedule"])
    save_conditions(result.report, out / names["conditions"])
    atomic_write_text(
        out / names["bundle"],
        _dump(bundle_to_obj(result, names["schedule"], names["conditions"])),
    )
    return {key: out / name for key, name in names.items()}


# -- tabular outputs ---------------------------------------------------------------

def norm_table_text(report: NormReport) -> str:
    lines = ["polynomial\toperator\tgrid_sup\targmax_j1\targmax_j2\tl1_bound"
             "\tvalue_at_1_re\tvalue_at_1_im"]
    for (name, op_name), entry in report.entries.items():
        lines.append(
            f"{name}\t{op_name}\t{entry.grid_sup!r}\t{entry.argmax.j1}"
            f"\t{entry.argmax.j2}\t{entry.l1_bound!r}"
            f"\t{entry.value_at_1.real!r}\t{entry.value_at_1.imag!r}"
        )
    lines.append(f"# ratio_c\t{report.ratio!r}")
    return "\n".join(lines) + "\n"


def save_norm_table(report: NormReport, path: PathLike) -> None:
    atomic_write_text(path, norm_table_text(report))


_SCAN_HEADER = ["n", "deg1", "upper_pure1", "upper_pure2", "mixed_best",
                "chain_lower", "ratio_c", "base_B", "ref_c", "status"]


def scan_csv_text(table: ScanTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SCAN_HEADER)
    for row in table.rows:
        writer.writerow([
            row.n,
            _int_str(row.deg1) if row.deg1 is not None else "",
            repr(row.upper_pure1),
            repr(row.upper_pure2),
            repr(row.mixed_best) if row.mixed_best is not None else "",
            repr(row.chain_lower),
            repr(row.ratio_c) if row.ratio_c is not None else "",
            _int_str(row.base) if row.base is not None else "",
            repr(row.ref_c),
            row.status,
        ])
    return buf.getvalue()


def save_scan_csv(table: ScanTable, path: PathLike) -> None:
    atomic_write_text(path, scan_csv_text(table))


def plot_scan(table: ScanTable, path: PathLike) -> None:
    """Vector plot of the measured ratio against the reference curve, log axes.

    Metadata that would vary between runs (dates) is stripped so identical
    scans produce identical files.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    full = [(r.n, r.ratio_c) for r in table.rows if r.ratio_c is not None]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    if full:
        ax.loglog(*zip(*full), "o-", label="measured ratio c(n)")
    ref = [(r.n, r.ref_c) for r in table.rows]
    ax.loglog(*zip(*ref), "--", label="n**(1/4) / (2*sqrt(2)*pi)")
    ax.set_xlabel("level n")
    ax.set_ylabel("mixed / pure bound ratio")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    metadata = {"Date": None} if path.suffix == ".svg" else {"CreationDate": None}
    fig.savefig(path, metadata=metadata)
    plt.close(fig)
