"""Parameter sweeps over the closed-form QFI results and their serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .bogoliubov import DEFAULT_N_TRUNC, CavityConfig, make_provider
from .errors import CavityQfiError, IoFailure, SpecValidation
from .states import (
    PureStateParams,
    WernerParams,
    pure_qfi_alice,
    pure_qfi_rob,
    pure_qfi_total,
    werner_qfi_alice,
    werner_qfi_rob,
    werner_qfi_total,
)

PROVIDERS = ("synthetic", "quadrature")
FORMATS = ("csv", "json")
FAMILIES = ("pure", "werner")


def u_grid(u_min: float = 0.0, u_max: float = 1.0, u_step: float = 0.01) -> List[float]:
    if u_step <= 0 or u_max < u_min:
        raise SpecValidation(f"bad u grid: min={u_min}, max={u_max}, step={u_step}")
    n = int(round((u_max - u_min) / u_step)) + 1
    return [round(u_min + i * u_step, 12) for i in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    family: str = "pure"
    u: Sequence[float] = field(default_factory=lambda: tuple(u_grid()))
    theta: Sequence[float] = (math.pi / 4,)
    r: Sequence[float] = (1.0,)
    s: Sequence[float] = (0.0,)
    k: Sequence[int] = (1,)
    h: float = 0.01
    provider: str = "synthetic"
    n_trunc: int = DEFAULT_N_TRUNC
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"

    def validate(self) -> "SweepSpec":
        if self.family not in FAMILIES:
            raise SpecValidation(f"family must be one of {FAMILIES}, got {self.family!r}")
        for name in ("u", "theta", "r", "s", "k"):
            if len(getattr(self, name)) == 0:
                raise SpecValidation(f"grid axis {name!r} is empty")
        if not 0.0 < self.h <= 0.1:
            raise SpecValidation(f"h must lie in (0, 0.1], got {self.h}")
        if self.provider not in PROVIDERS:
            raise SpecValidation(f"provider must be one of {PROVIDERS}, got {self.provider!r}")
        if self.format not in FORMATS:
            raise SpecValidation(f"format must be one of {FORMATS}, got {self.format!r}")
        if any(not 0.0 <= x <= 1.0 for x in self.r):
            raise SpecValidation("r values must lie in [0, 1]")
        if self.family == "pure" and any(x != 1.0 for x in self.r):
            raise SpecValidation("the pure family takes r = 1 only")
        if any(not 0.0 < t < math.pi / 2 for t in self.theta):
            raise SpecValidation("theta values must lie in (0, pi/2)")
        if any(not 0.0 <= x < 1.0 for x in self.s):
            raise SpecValidation("s values must lie in [0, 1)")
        if self.n_trunc < 1:
            raise SpecValidation("n_trunc must be positive")
        return self

    def points(self):
        """Grid points in lexicographic order over (u, theta, r, s, k)."""
        for u in self.u:
            for theta in self.theta:
                for r in self.r:
                    for s in self.s:
                        for k in self.k:
                            yield float(u), float(theta), float(r), float(s), int(k)


@dataclass(frozen=True)
class SweepRow:
    u: float
    s: float
    k: int
    theta: float
    r: float
    h: float
    f_plus: float
    f_minus: float
    qfi_total: float
    qfi_alice: float
    qfi_rob: float
    classical_part: float
    mixture_part: float
    provider: str
    N_trunc: int


COLUMNS = tuple(f.name for f in fields(SweepRow))

_PROVIDER_CACHE: dict = {}


def _provider(kind: str, s: float, seed: int, h: float):
    key = (kind, s, seed)
    if key not in _PROVIDER_CACHE:
        cfg = CavityConfig.from_h(h, u=0.0, s=s)
        _PROVIDER_CACHE[key] = make_provider(kind, cfg, seed=seed)
    return _PROVIDER_CACHE[key]


def evaluate_point(spec: SweepSpec, point) -> SweepRow:
    from .bogoliubov import mode_sums

    u, theta, r, s, k = point
    try:
        cfg = CavityConfig.from_h(spec.h, u=u, s=s)
        prov = _provider(spec.provider, s, spec.seed, spec.h)
        bog = mode_sums(prov, cfg, k, spec.n_trunc)
        nu = 1 if k >= 0 else -1
        if spec.family == "pure" or r == 1.0:
            p = PureStateParams(theta, 1, 1, nu)
            br = pure_qfi_total(p, bog, spec.h)
            alice, rob = pure_qfi_alice(), pure_qfi_rob(p, bog, spec.h)
        else:
            w = WernerParams(r, theta, 1, nu)
            br = werner_qfi_total(w, bog, spec.h)
            alice, rob = werner_qfi_alice(w), werner_qfi_rob(w, bog, spec.h)
    except CavityQfiError as exc:
        raise type(exc)(f"{exc} [row u={u!r}, theta={theta!r}, r={r!r}, s={s!r}, k={k}, "
                        f"h={spec.h!r}, provider={spec.provider}]") from exc
    return SweepRow(u, s, k, theta, r, spec.h, bog.f_plus, bog.f_minus, br.total, alice, rob,
                    br.classical_part, br.mixture_part, spec.provider, bog.n_trunc)


def _evaluate_chunk(args):
    spec, points = args
    return [evaluate_point(spec, p) for p in points]


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[SweepRow]:
    """Evaluate every grid point; output order never depends on ``workers``."""
    spec.validate()
    pts = list(spec.points())
    if workers <= 1 or len(pts) < 2:
        return [evaluate_point(spec, p) for p in pts]
    size = max(1, math.ceil(len(pts) / (4 * workers)))
    chunks = [(spec, pts[i:i + size]) for i in range(0, len(pts), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map yields results in submission order
        return [row for part in pool.map(_evaluate_chunk, chunks) for row in part]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: Iterable[SweepRow]) -> str:
    data = []
    for row in rows:
        d = asdict(row)
        data.append({c: (None if isinstance(d[c], float) and not math.isfinite(d[c]) else d[c]) for c in COLUMNS})
    return json.dumps({"columns": list(COLUMNS), "rows": data}, indent=1) + "\n"


def parse_csv(text: str) -> List[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append({c: _parse_value(c, rec[c]) for c in COLUMNS})
    return out


def _parse_value(col: str, raw: str):
    if col == "provider":
        return raw
    if col in ("k", "N_trunc"):
        return int(raw)
    return float(raw)


def serialize(rows: Sequence[SweepRow], fmt: str) -> str:
    return rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)


def write_output(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        import sys
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


# figure grids ------------------------------------------------------------------

FIG1_S = (0.0, 0.25, 0.5, 0.75)
FIG3_R = (0.1, 0.33, 0.5, 0.66, 0.85, 0.99)


def fig1_spec(provider: str = "quadrature", h: float = 0.01, **kw) -> SweepSpec:
    return SweepSpec(family="pure", theta=(math.pi / 4,), r=(1.0,), s=FIG1_S, k=(1, -1),
                     h=h, provider=provider, **kw)


def fig2_spec(provider: str = "quadrature", h: float = 0.01, r: float = 1 / 3, **kw) -> SweepSpec:
    return SweepSpec(family="werner", theta=(math.pi / 4,), r=(r,), s=FIG1_S, k=(1, -1),
                     h=h, provider=provider, **kw)


def fig3_spec(provider: str = "quadrature", h: float = 0.01, **kw) -> SweepSpec:
    return SweepSpec(family="werner", theta=(math.pi / 4,), r=FIG3_R, s=(0.0,), k=(1,),
                     h=h, provider=provider, **kw)


def curves(rows: Sequence[SweepRow], key=("s", "k", "r")) -> dict:
    """Group rows into curves keyed by the non-u axes, each sorted by u."""
    out: dict = {}
    for row in rows:
        out.setdefault(tuple(getattr(row, a) for a in key), []).append(row)
    for v in out.values():
        v.sort(key=lambda r: r.u)
    return out
