"""Built-in acceptance checks, shared by ``lzzeno validate`` and the test suite.

Each check returns a :class:`CheckResult`.  Tolerances are fixed here and are
not tuned per run.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import experiments as ex
from .dynamics import (
    ADIABATIC_MEASUREMENT,
    DIABATIC_MEASUREMENT,
    ConvergenceWarning,
    Protocol,
    SimConfig,
    integrate,
)
from .kraus_oracle import discrete_propagate, projective_zeno_simulate
from .lz_model import GAUGE_SIGN, LzParams, lz_survival_probability, zeno_projective_survival
from .quantum_core import ADIABATIC, DIABATIC, DensityMatrix


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.key:>3} {self.title}: {self.detail} ({self.seconds:.1f}s)"


@dataclass(frozen=True)
class Options:
    fast: bool = False
    gauge_sign: float = GAUGE_SIGN
    artifacts: Path | None = None


@lru_cache(maxsize=None)
def _run(z: float, lam: float, kind: str, dt: float = 0.005,
         t_start: float | None = None, t_end: float | None = None, gauge_sign: float = GAUGE_SIGN):
    protocol = Protocol.static(0.0) if kind == "static" else Protocol(kind)
    cfg = SimConfig(LzParams(z, lam), protocol, t_start=t_start, t_end=t_end, dt=dt,
                    gauge_sign=gauge_sign, sample_stride=1 if kind == "static" else 20)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return integrate(cfg)


def clear_cache() -> None:
    _run.cache_clear()


def _fmt(values) -> str:
    return "[" + ", ".join(f"{v:.4g}" for v in values) + "]"


# ----------------------------------------------------------------------------


def check_lz_limit(opt: Options):
    zs = (0.05, 0.2, 1.0) if opt.fast else (0.05, 0.1, 0.2, 0.5, 1.0)
    got = [ex.extract_asymptote(_run(z, 0.0, "diabatic", 0.005, -200.0, 200.0), DIABATIC, 1)[0] for z in zs]
    want = [lz_survival_probability(z) for z in zs]
    err = max(abs(a - b) for a, b in zip(got, want))
    return err <= 0.02, f"z={_fmt(zs)} survival={_fmt(got)} exp(-pi z)={_fmt(want)} max|err|={err:.2e} (tol 0.02)"


def check_plateau(opt: Options):
    lams = (5.0, 10.0, 20.0)
    trajs = [_run(0.5, lam, "diabatic") for lam in lams]
    p1 = [ex.extract_asymptote(tr, DIABATIC, 1)[0] for tr in trajs]
    p2 = [ex.extract_asymptote(tr, DIABATIC, 2)[0] for tr in trajs]
    worst = max(abs(p - 0.5) for p in p1 + p2)
    times = [ex.time_to_threshold(tr, 0.1) for tr in trajs]
    slowing = all(a < b for a, b in zip(times, times[1:]))
    ok = worst <= 0.02 and slowing
    return ok, (f"lambda={_fmt(lams)} p1_dia={_fmt(p1)} max|p-0.5|={worst:.4f} (tol 0.02); "
                f"time to |drho|<0.1 = {_fmt(times)} increasing={slowing}")


def check_strong_rate(opt: Options):
    z = 0.5
    lams = (10.0, 20.0)
    rates = [ex.fit_decay_rate(_run(z, lam, "static", 0.005, 0.0, 20.0), (0.0, 20.0)) for lam in lams]
    predicted = [z * z / lam for lam in lams]
    rel = [abs(r - p) / p for r, p in zip(rates, predicted)]
    ratio = rates[0] / rates[1]
    ok = max(rel) <= 0.1 and abs(ratio - 2.0) / 2.0 <= 0.1
    return ok, (f"fitted={_fmt(rates)} z^2/lambda={_fmt(predicted)} rel.err={_fmt(rel)} (tol 0.1); "
                f"fitted/(z^2/lambda)={_fmt([r / p for r, p in zip(rates, predicted)])}; "
                f"ratio={ratio:.4f} (2 +- 10%)")


def check_adiabatic_zeno(opt: Options):
    lams = (0.0, 0.5, 1.0, 2.0, 5.0)
    surv = [ex.extract_asymptote(_run(0.05, lam, "adiabatic", gauge_sign=opt.gauge_sign), ADIABATIC, 2)[0]
            for lam in lams]
    ok = all(a < b for a, b in zip(surv, surv[1:]))
    return ok, f"z=0.05 lambda={_fmt(lams)} survival={_fmt(surv)} strictly increasing={ok}"


def check_nonmonotonic(opt: Options):
    lams = (0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
    surv = [ex.extract_asymptote(_run(5.0, lam, "adiabatic", gauge_sign=opt.gauge_sign), ADIABATIC, 2)[0]
            for lam in lams]
    dips = [surv[0] - s for s in surv[1:]]
    k = int(np.argmax(dips))
    ok = dips[k] > 0.005
    return ok, (f"z=5 survival={_fmt(surv)}; deepest dip {dips[k]:.4f} at lambda={lams[k + 1]:g} "
                f"(must exceed 0.005)")


def check_oracle(opt: Options):
    cfg = SimConfig(LzParams(0.5, 1.0), DIABATIC_MEASUREMENT, t_start=-20.0, t_end=20.0)
    ref = integrate(cfg).rho[-1]
    errs = [float(np.max(np.abs(discrete_propagate(cfg, h).rho[-1] - ref))) for h in (1e-3, 5e-4)]
    ratio = errs[0] / errs[1]
    ok = errs[0] <= 1e-3 and abs(ratio - 2.0) <= 0.3 * 2.0
    return ok, f"max error at dt_meas=1e-3: {errs[0]:.3e} (tol 1e-3); at 5e-4: {errs[1]:.3e}; ratio={ratio:.3f} (2 +- 30%)"


def basis_mismatch(z: float, gauge_sign: float = GAUGE_SIGN) -> float:
    """Largest element difference between adiabatic-frame and diabatic-frame runs at lambda=0."""
    start = DensityMatrix.pure(1)
    dia = integrate(SimConfig(LzParams(z, 0.0), DIABATIC_MEASUREMENT, -200.0, 200.0, initial=start))
    adi = integrate(SimConfig(LzParams(z, 0.0), ADIABATIC_MEASUREMENT, -200.0, 200.0, initial=start,
                              gauge_sign=gauge_sign))
    return float(np.max(np.abs(adi.states(DIABATIC) - dia.rho)))


def check_basis_consistency(opt: Options):
    zs = (0.05, 0.5, 5.0)
    errs = [basis_mismatch(z, opt.gauge_sign) for z in zs]
    return max(errs) <= 1e-6, f"z={_fmt(zs)} max element error={_fmt(errs)} (tol 1e-6)"


def check_projective_zeno(opt: Options):
    ns = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)
    sim = [projective_zeno_simulate(1.0, 1.0, n) for n in ns]
    e100 = abs(sim[ns.index(100)] - zeno_projective_survival(1.0, 1.0, 100))
    e1000 = abs(sim[ns.index(1000)] - zeno_projective_survival(1.0, 1.0, 1000))
    mono = all(a < b for a, b in zip(sim, sim[1:])) and sim[-1] <= 1.0
    ok = e100 <= 1e-3 and e1000 <= 1e-4 and mono
    return ok, (f"|sim-approx| N=100: {e100:.2e} (tol 1e-3), N=1000: {e1000:.2e} (tol 1e-4); "
                f"survival N={ns[0]}..{ns[-1]}: {sim[0]:.4f}..{sim[-1]:.6f} increasing={mono}")


def _grid(opt: Options):
    zs = (0.05, 5.0) if opt.fast else (0.05, 0.5, 5.0)
    lams = (0.0, 5.0) if opt.fast else (0.0, 0.5, 5.0, 50.0)
    return [(z, lam, kind) for z in zs for lam in lams for kind in ("diabatic", "adiabatic")]


def check_invariants(opt: Options):
    worst_trace = worst_eig = worst_rise = worst_unitary = 0.0
    min_eig = 1.0
    for z, lam, kind in _grid(opt):
        tr = _run(z, lam, kind, gauge_sign=opt.gauge_sign)
        worst_trace = max(worst_trace, float(np.max(np.abs(tr.p1_dia + tr.p2_dia - 1.0))))
        min_eig = min(min_eig, tr.min_eigenvalue, float(np.min(np.linalg.eigvalsh(tr.rho)[:, 0])))
        pur = tr.purity()
        if lam > 0:
            worst_rise = max(worst_rise, float(np.max(np.diff(pur))))
        else:
            worst_unitary = max(worst_unitary, float(np.max(np.abs(pur - 1.0))))
    worst_eig = min_eig
    ok = worst_trace <= 1e-9 and worst_eig >= -1e-8 and worst_rise <= 1e-9 and worst_unitary <= 1e-8
    return ok, (f"trace err {worst_trace:.1e} (1e-9), min eig {worst_eig:.1e} (-1e-8), "
                f"max purity rise {worst_rise:.1e} (1e-9), |purity-1| at lambda=0 {worst_unitary:.1e} (1e-8)")


def check_convergence(opt: Options):
    worst = 0.0
    where = None
    for z, lam, kind in _grid(opt):
        a = _run(z, lam, kind, 0.005, gauge_sign=opt.gauge_sign)
        b = _run(z, lam, kind, 0.0025, gauge_sign=opt.gauge_sign)
        d = max(abs(a.p1_dia[-1] - b.p1_dia[-1]), abs(a.p1_adi[-1] - b.p1_adi[-1]))
        if d >= worst:
            worst, where = d, (z, lam, kind)
    return worst <= 1e-5, f"max endpoint change dt 0.005 -> 0.0025: {worst:.2e} at {where} (tol 1e-5)"


def check_freeze(opt: Options):
    zs = (0.5, 1.0)
    got = [abs(ex.extract_asymptote(_run(z, 3 * z, "diabatic"), DIABATIC, 1)[0]
               - ex.extract_asymptote(_run(z, 3 * z, "diabatic"), DIABATIC, 2)[0]) for z in zs]
    est = [math.exp(-z) for z in zs]
    ratios = [g / e for g, e in zip(got, est)]
    ok = all(0.5 <= r <= 2.0 for r in ratios)
    return ok, (f"z={_fmt(zs)} |drho_dia|={_fmt(got)} exp(-z)={_fmt(est)} ratio={_fmt(ratios)} (0.5..2); "
                f"exp(-2 pi z)={_fmt([math.exp(-2 * math.pi * z) for z in zs])}")


def check_fig3_edges(opt: Options):
    from . import io

    a = ex.sweep(ex.figure_sweep_spec("3a", opt.fast))
    b = ex.sweep(ex.figure_sweep_spec("3b", opt.fast))
    if opt.artifacts is not None:
        io.write_sweep(Path(opt.artifacts) / "fig3a.csv", a)
        io.write_sweep(Path(opt.artifacts) / "fig3b.csv", b)
    edge_a = [c.survival for c in a.cells if c.lambda_tilde == 0.0]
    edge_b = [c.survival for c in b.cells if c.lambda_tilde == 0.0]
    same = edge_a == edge_b and not any(math.isnan(v) for v in edge_a)
    shape = a.surface().shape
    return same, f"surfaces {shape[1]}x{shape[0]} (z x lambda) emitted; lambda=0 edges identical={same}"


CHECKS: list[tuple[str, str, Callable[[Options], tuple[bool, str]]]] = [
    ("1", "LZ no-measurement limit", check_lz_limit),
    ("2", "equal-population plateau", check_plateau),
    ("3", "strong-measurement rate", check_strong_rate),
    ("4", "adiabatic-protocol Zeno ordering", check_adiabatic_zeno),
    ("5", "non-monotonicity near the adiabatic limit", check_nonmonotonic),
    ("6", "Kraus oracle equivalence", check_oracle),
    ("7", "basis consistency", check_basis_consistency),
    ("8", "projective Zeno", check_projective_zeno),
    ("9", "invariant suite", check_invariants),
    ("10", "step-halving convergence", check_convergence),
    ("11", "freeze estimate", check_freeze),
    ("11b", "Fig. 3 surfaces", check_fig3_edges),
]


def run_check(key: str, opt: Options = Options()) -> CheckResult:
    for k, title, fn in CHECKS:
        if k == key:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(opt)
            except Exception as exc:
                ok, detail = False, f"raised {type(exc).__name__}: {exc}"
            return CheckResult(k, title, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(key)


def run_all(opt: Options = Options(), only=None) -> list[CheckResult]:
    keys = [k for k, _, _ in CHECKS if only is None or k in only]
    return [run_check(k, opt) for k in keys]
