"""Monte Carlo harness: memory trials, lifetime simulation, threshold scans,
iteration statistics, and the logical-error-rate scaling fit.

Trials are independent work items; each draws its own generator from
(seed, trial index), so results are bit-identical for a fixed seed
regardless of how trials are partitioned across processes.  Shared state
(layout, circuit, decoding graphs) is built once and inherited read-only
by forked workers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .code import build_layout, build_se_circuit, ideal_syndrome
from .graph import build_code_capacity_pair, build_decoder_graphs
from .irmwpm import decode
from .matcher import events_to_nodes
from .noise import NoiseParams, sample_faults, simulate
from .pauli import PauliOperator, commutation_parity, multiply

DECODERS = ("mwpm", "irmwpm")


class FitError(RuntimeError):
    """The scaling fit is ill-posed for the supplied data."""


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo configuration."""

    L: int
    p: float
    trials: int
    seed: int = 0
    T: int | None = None  # rounds per decoding window; default L
    decoder: str = "irmwpm"
    max_iterations: int = 10
    stopping: str = "consecutive"
    check_period: int | None = None  # lifetime virtual-check period; default L
    threads: int | None = None  # default: available parallelism
    idle_noise: bool = True
    reweight_boundary: bool = True
    virtual_decoder: str | None = None  # lifetime ideal decoder; default = decoder
    lifetime_cap: int = 1_000_000
    # lifetime window closure: "ideal" appends the virtual perfect round to
    # each working decode (standard lifetime methodology); "open" commits
    # fully-noisy windows and lets the next window pick up the leftovers
    closure: str = "ideal"
    # keep only each event's m nearest partners in matching (None = exact)
    prune_neighbors: int | None = None

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("distance must be >= 2")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must be in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        if self.closure not in ("ideal", "open"):
            raise ValueError("closure must be 'ideal' or 'open'")

    @property
    def rounds(self) -> int:
        return self.T if self.T is not None else self.L

    @property
    def n_threads(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        return max(1, os.cpu_count() or 1)


@dataclass
class RateEstimate:
    """Logical error rate per decoding window with a Wilson 95% interval."""

    L: int
    T: int
    p: float
    decoder: str
    trials: int
    failures: int
    mean_extra_iterations: float
    monotonicity_violations: int
    ci_low: float
    ci_high: float
    nonconverged: int = 0
    iteration_histogram: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    def to_row(self) -> dict:
        return {
            "distance": self.L,
            "rounds": self.T,
            "p": self.p,
            "decoder": self.decoder,
            "trials": self.trials,
            "failures": self.failures,
            "rate": self.rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "mean_extra_iterations": self.mean_extra_iterations,
            "monotonicity_violations": self.monotonicity_violations,
            "nonconverged": self.nonconverged,
        }


def wilson_interval(failures: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    phat = failures / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(
        phat * (1 - phat) / trials + z * z / (4 * trials * trials)
    )
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class _Context:
    """Shared immutable per-configuration state."""

    config: SimConfig
    layout: object
    circuit: object
    gx: object
    gz: object
    gx_open: object = None  # lifetime windows: no perfect final round
    gz_open: object = None
    gx_cc: object = None  # 2D virtual-check lattices
    gz_cc: object = None


def _build_context(config: SimConfig, lifetime: bool = False) -> _Context:
    layout = build_layout(config.L)
    circuit = build_se_circuit(layout)
    gx, gz = build_decoder_graphs(
        config.L, config.rounds, config.p, True, config.idle_noise
    )
    ctx = _Context(config, layout, circuit, gx, gz)
    if lifetime:
        if config.closure == "open":
            # steady-state open windows: no perfect final round; mechanisms
            # from the previous window's tail explain inherited detections
            ctx.gx_open, ctx.gz_open = build_decoder_graphs(
                config.L, config.rounds, config.p, False, config.idle_noise,
                warmup_rounds=2,
            )
        ctx.gx_cc, ctx.gz_cc = build_code_capacity_pair(config.L)
    return ctx


def _decode_events(ctx: _Context, graph_x, graph_z, events_x, events_z, decoder):
    cfg = ctx.config
    max_iters = 0 if decoder == "mwpm" else cfg.max_iterations
    return decode(
        graph_x,
        graph_z,
        events_x,
        events_z,
        ctx.layout,
        max_iterations=max_iters,
        stopping=cfg.stopping,
        reweight_boundary=cfg.reweight_boundary,
        raise_on_violation=False,
        prune_neighbors=cfg.prune_neighbors,
    )


def _logical_failure(layout, residual: PauliOperator, e_x, e_z) -> bool:
    total = multiply(multiply(residual, e_x), e_z)
    return bool(
        commutation_parity(total, layout.logical_x)
        or commutation_parity(total, layout.logical_z)
    )


def run_memory_trial(ctx: _Context, rng: np.random.Generator):
    """One decoding window: T noisy rounds plus a perfect readout round.

    Returns (failed, extra_iterations, monotone, converged).
    """
    cfg = ctx.config
    faults = sample_faults(
        ctx.circuit, NoiseParams(cfg.p), cfg.rounds, rng, cfg.idle_noise
    )
    hist = simulate(ctx.layout, ctx.circuit, faults, cfg.rounds, True)
    ev_x = events_to_nodes(ctx.gx, hist.x_lattice_events)
    ev_z = events_to_nodes(ctx.gz, hist.z_lattice_events)
    e_x, e_z, trace = _decode_events(ctx, ctx.gx, ctx.gz, ev_x, ev_z, cfg.decoder)
    failed = _logical_failure(ctx.layout, hist.residual, e_x, e_z)
    converged = trace.stop_reason != "max_iters" or cfg.decoder == "mwpm"
    return failed, trace.extra_iterations, trace.monotonic, converged


def _events_vs_reference(outcomes: np.ndarray, reference: np.ndarray):
    diffs = outcomes.copy()
    diffs[0] ^= reference
    diffs[1:] ^= outcomes[:-1]
    ts, ss = np.nonzero(diffs)
    return [(int(s), int(t) + 1) for t, s in zip(ts, ss)]


def run_lifetime_trial(ctx: _Context, rng: np.random.Generator):
    """Noisy windows with periodic ideal 2D checks; rounds until failure.

    Returns (rounds_survived, capped).  Every T rounds the working decoder
    consumes the accumulated window syndromes and its correction is applied
    to the running state; the periodic 2D virtual decode only checks for a
    logical failure and never disturbs the state.

    With ``closure="ideal"`` each window decode also sees the virtual
    perfect readout as its final layer (the usual lifetime methodology);
    with ``closure="open"`` windows are committed from noisy rounds alone
    and leftovers surface as inherited detections in the next window.
    """
    cfg = ctx.config
    layout, circuit = ctx.layout, ctx.circuit
    T = cfg.rounds
    check_period = cfg.check_period or cfg.L
    vdec = cfg.virtual_decoder or cfg.decoder
    open_windows = cfg.closure == "open"
    n_x = len(layout.x_stabilizers)
    n_z = len(layout.z_stabilizers)
    residual = PauliOperator.identity(layout.n_data)
    ref_x = np.zeros(n_x, dtype=np.uint8)
    ref_z = np.zeros(n_z, dtype=np.uint8)
    rounds = 0
    params = NoiseParams(cfg.p)
    g_x = ctx.gx_open if open_windows else ctx.gx
    g_z = ctx.gz_open if open_windows else ctx.gz

    while rounds < cfg.lifetime_cap:
        faults = sample_faults(circuit, params, T, rng, cfg.idle_noise)
        hist = simulate(
            layout, circuit, faults, T, not open_windows, initial_error=residual
        )
        rounds += T
        ev_x = _events_vs_reference(hist.z_anc_outcomes, ref_z)  # X errors
        ev_z = _events_vs_reference(hist.x_anc_outcomes, ref_x)  # Z errors
        e_x, e_z, _ = _decode_events(
            ctx,
            g_x,
            g_z,
            events_to_nodes(g_x, ev_x),
            events_to_nodes(g_z, ev_z),
            cfg.decoder,
        )
        residual = multiply(multiply(hist.residual, e_x), e_z)
        # corrections shift the syndrome reference for the next window
        syn = ideal_syndrome(layout, multiply(e_x, e_z))
        ref_x = hist.x_anc_outcomes[-1] ^ np.array(syn[:n_x], dtype=np.uint8)
        ref_z = hist.z_anc_outcomes[-1] ^ np.array(syn[n_x:], dtype=np.uint8)

        if rounds % check_period == 0:
            syn_now = ideal_syndrome(layout, residual)
            ev_z_cc = [ctx.gz_cc.node_id(i, 1) for i in range(n_x) if syn_now[i]]
            ev_x_cc = [
                ctx.gx_cc.node_id(i, 1) for i in range(n_z) if syn_now[n_x + i]
            ]
            v_x, v_z, _ = _decode_events(
                ctx, ctx.gx_cc, ctx.gz_cc, ev_x_cc, ev_z_cc, vdec
            )
            if _logical_failure(layout, residual, v_x, v_z):
                return rounds, False
    return rounds, True


# ---------------------------------------------------------------------------
# parallel execution

_WORKER_CTX: _Context | None = None


def _run_memory_chunk(args):
    lo, hi = args
    ctx = _WORKER_CTX
    failures = 0
    iter_hist: dict[int, int] = {}
    violations = 0
    nonconverged = 0
    for trial in range(lo, hi):
        rng = np.random.default_rng([ctx.config.seed, trial])
        failed, extra, monotone, converged = run_memory_trial(ctx, rng)
        failures += int(failed)
        iter_hist[extra] = iter_hist.get(extra, 0) + 1
        violations += int(not monotone)
        nonconverged += int(not converged)
    return failures, iter_hist, violations, nonconverged


def _run_lifetime_chunk(args):
    lo, hi = args
    ctx = _WORKER_CTX
    out = []
    for trial in range(lo, hi):
        rng = np.random.default_rng([ctx.config.seed, trial])
        out.append(run_lifetime_trial(ctx, rng))
    return out


def _parallel_chunks(ctx: _Context, n_trials: int, chunk_fn):
    """Run trial chunks, in-process or across forked workers."""
    global _WORKER_CTX
    threads = ctx.config.n_threads
    chunk = max(1, min(512, (n_trials + 4 * threads - 1) // (4 * threads)))
    spans = [(lo, min(lo + chunk, n_trials)) for lo in range(0, n_trials, chunk)]
    _WORKER_CTX = ctx
    try:
        if threads == 1 or len(spans) == 1:
            return [chunk_fn(s) for s in spans]
        import multiprocessing as mp

        mp_ctx = mp.get_context("fork")
        with mp_ctx.Pool(threads) as pool:
            return pool.map(chunk_fn, spans)
    finally:
        _WORKER_CTX = None


def estimate_rate(config: SimConfig, ctx: _Context | None = None) -> RateEstimate:
    """Memory-trial logical error rate for one configuration."""
    if ctx is None:
        ctx = _build_context(config)
    results = _parallel_chunks(ctx, config.trials, _run_memory_chunk)
    failures = sum(r[0] for r in results)
    iter_hist: dict[int, int] = {}
    violations = 0
    nonconverged = 0
    for _, h, v, nc in results:
        violations += v
        nonconverged += nc
        for k, n in h.items():
            iter_hist[k] = iter_hist.get(k, 0) + n
    total_extra = sum(k * n for k, n in iter_hist.items())
    lo, hi = wilson_interval(failures, config.trials)
    return RateEstimate(
        L=config.L,
        T=config.rounds,
        p=config.p,
        decoder=config.decoder,
        trials=config.trials,
        failures=failures,
        mean_extra_iterations=total_extra / config.trials,
        monotonicity_violations=violations,
        nonconverged=nonconverged,
        ci_low=lo,
        ci_high=hi,
        iteration_histogram=iter_hist,
    )


@dataclass
class LifetimeEstimate:
    L: int
    p: float
    decoder: str
    trials: int
    mean_rounds: float
    capped: int
    rounds: list[int] = field(repr=False, default_factory=list)

    def to_row(self) -> dict:
        return {
            "distance": self.L,
            "p": self.p,
            "decoder": self.decoder,
            "trials": self.trials,
            "mean_rounds": self.mean_rounds,
            "capped": self.capped,
        }


def estimate_lifetime(config: SimConfig) -> LifetimeEstimate:
    """Average logical-qubit lifetime in SE rounds."""
    ctx = _build_context(config, lifetime=True)
    results = _parallel_chunks(ctx, config.trials, _run_lifetime_chunk)
    rounds = []
    capped = 0
    for chunk in results:
        for r, c in chunk:
            rounds.append(r)
            capped += int(c)
    return LifetimeEstimate(
        L=config.L,
        p=config.p,
        decoder=config.decoder,
        trials=config.trials,
        mean_rounds=sum(rounds) / len(rounds),
        capped=capped,
        rounds=rounds,
    )


def iteration_stats(iter_hist: dict[int, int]) -> dict:
    """Histogram plus mean of additional iterations beyond the first decode."""
    total = sum(iter_hist.values())
    mean = sum(k * n for k, n in iter_hist.items()) / total if total else 0.0
    return {"histogram": dict(sorted(iter_hist.items())), "mean": mean, "count": total}


# ---------------------------------------------------------------------------
# threshold estimation

def _fit_rate_curve(ps, rates):
    """Quadratic fit of log10(rate) against log10(p); returns coefficients."""
    lp = np.log10(ps)
    lr = np.log10(rates)
    return np.polyfit(lp, lr, 2)


def _pair_crossing(ps, r1, r2, lo=None, hi=None):
    """Crossing of two fitted rate curves within the scanned p range."""
    valid = (np.asarray(r1) > 0) & (np.asarray(r2) > 0)
    if valid.sum() < 3:
        return None
    ps = np.asarray(ps)[valid]
    c1 = _fit_rate_curve(ps, np.asarray(r1)[valid])
    c2 = _fit_rate_curve(ps, np.asarray(r2)[valid])
    diff = np.polysub(c1, c2)
    roots = np.roots(diff)
    lo = math.log10(lo if lo is not None else ps.min())
    hi = math.log10(hi if hi is not None else ps.max())
    real = [
        10 ** r.real
        for r in roots
        if abs(r.imag) < 1e-9 and lo - 1e-12 <= r.real <= hi + 1e-12
    ]
    if not real:
        return None
    return min(real, key=lambda x: abs(math.log10(x) - (lo + hi) / 2))


@dataclass
class ThresholdEstimate:
    decoder: str
    crossing: float | None
    crossing_std: float | None
    pairwise: dict
    no_crossing: bool

    def to_dict(self) -> dict:
        return {
            "decoder": self.decoder,
            "crossing": self.crossing,
            "crossing_std": self.crossing_std,
            "pairwise": {f"{a}-{b}": v for (a, b), v in self.pairwise.items()},
            "no_crossing": self.no_crossing,
        }


def threshold_scan(
    rates: dict[tuple[int, float], RateEstimate],
    bootstrap: int = 1000,
    seed: int = 0,
) -> ThresholdEstimate:
    """Crossing point of logical-error-rate curves across distances.

    ``rates`` maps (L, p) to estimates for a single decoder over a common
    p grid.  Pairwise crossings between adjacent distances are combined;
    uncertainty comes from binomial bootstrap resampling of the failure
    counts.  Absence of a crossing is reported, not raised.
    """
    Ls = sorted({L for (L, _p) in rates})
    ps = sorted({p for (_L, p) in rates})
    decoder = next(iter(rates.values())).decoder
    if len(Ls) < 2 or len(ps) < 4:
        raise ValueError("need >= 2 distances and >= 4 p points")
    curves = {L: [rates[(L, p)].rate for p in ps] for L in Ls}

    pairwise = {}
    centers = []
    for a, b in zip(Ls, Ls[1:]):
        x = _pair_crossing(ps, curves[a], curves[b])
        pairwise[(a, b)] = x
        if x is not None:
            centers.append(x)
    if not centers:
        return ThresholdEstimate(decoder, None, None, pairwise, True)

    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(bootstrap):
        sampled = {}
        for L in Ls:
            row = []
            for p in ps:
                est = rates[(L, p)]
                row.append(rng.binomial(est.trials, est.rate) / est.trials)
            sampled[L] = row
        vals = []
        for a, b in zip(Ls, Ls[1:]):
            x = _pair_crossing(ps, sampled[a], sampled[b])
            if x is not None:
                vals.append(x)
        if vals:
            boots.append(float(np.mean(vals)))
    crossing = float(np.mean(centers))
    std = float(np.std(boots)) if boots else None
    return ThresholdEstimate(decoder, crossing, std, pairwise, False)


# ---------------------------------------------------------------------------
# scaling fit

@dataclass
class FitParams:
    """Parameters of log10 P = (a L^2 + b L + c) + (e L^2 + f L + g) log10 p."""

    a: float
    b: float
    c: float
    e: float
    f: float
    g: float
    residual_rms: float = 0.0

    def predict(self, p: float, L: int) -> float:
        lp = math.log10(p)
        exponent = (self.a * L * L + self.b * L + self.c) + (
            self.e * L * L + self.f * L + self.g
        ) * lp
        return 10.0 ** exponent

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "e": self.e,
            "f": self.f,
            "g": self.g,
            "residual_rms": self.residual_rms,
        }


def fit_scaling(points: list[tuple[float, int, float]]) -> FitParams:
    """Least-squares fit of rate data (p, L, rate) in log10 space.

    Requires at least 6 points spanning at least 2 distances; raises
    FitError with diagnostics when the design matrix is rank deficient.
    """
    pts = [(p, L, r) for (p, L, r) in points if r > 0]
    if len(pts) < 6 or len({L for _, L, _ in pts}) < 2:
        raise FitError(
            f"need >= 6 positive-rate points over >= 2 distances, got {len(pts)}"
        )
    rows = []
    ys = []
    for p, L, r in pts:
        lp = math.log10(p)
        rows.append([L * L, L, 1.0, L * L * lp, L * lp, lp])
        ys.append(math.log10(r))
    A = np.array(rows)
    y = np.array(ys)
    rank = np.linalg.matrix_rank(A)
    if rank < 6:
        raise FitError(
            f"design matrix rank {rank} < 6; vary both p and L "
            f"(got {sorted({L for _, L, _ in pts})} distances, "
            f"{sorted({p for p, _, _ in pts})} rates)"
        )
    sol, _res, _rank, _sv = np.linalg.lstsq(A, y, rcond=None)
    resid = A @ sol - y
    rms = float(np.sqrt(np.mean(resid**2)))
    a, b, c, e, f, g = (float(v) for v in sol)
    return FitParams(a, b, c, e, f, g, rms)
