"""Markov-chain drivers and the experiments built on them.

The chain: at each step pick a site uniformly at random, add a random
amount of mass there (fixed value, or uniform on [a, b]), stabilize.
Scalar drivers evolve one configuration and support per-step callbacks;
ensemble drivers evolve many replicas in lockstep with vectorized
integer stabilization, which is what the distribution-level experiments
(invariance, decay to the invariant law, coupling frequencies, rational
limits) need to reach useful sample sizes.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from . import btw
from .cbtw import SNAP, AdditionParams, CbtwConfig, quantum_multiple, _add_inplace
from .errors import DomainError
from .measures import Binning, Histogram, estimate_tv, \
    sample_rational_limit_batch, sample_uniform_allowed_batch, tv_noise_floor


@dataclass
class ChainState:
    """Where a scalar chain run ended up.

    theta accumulates the total mass added per site over the run.
    """

    t: int
    config: CbtwConfig
    theta: np.ndarray


def run_chain(lat, initial, params, steps, rng, on_step=None):
    """Run the randomized-addition chain for `steps` steps.

    Each step draws the site first, then the amount. In fixed-amount mode
    the configuration is switched to tracked bookkeeping so fractional
    parts are recomputed, not accumulated. on_step(t, x, u, quanta, frac)
    is called after each step with live views (copy them to keep them).
    """
    cfg = initial.copy()
    if params.mode == "fixed" and cfg.add_counts is None:
        cfg = cfg.with_tracking()
    quanta, frac = cfg.quanta, cfg.frac
    theta = np.zeros(lat.n_sites)
    for t in range(1, steps + 1):
        x = int(rng.integers(lat.n_sites))
        u = float(params.a) if params.mode == "fixed" else float(rng.uniform(params.a, params.b))
        _add_inplace(lat, quanta, frac, x, u,
                     add_counts=cfg.add_counts, base_frac=cfg.base_frac)
        theta[x] += u
        if on_step is not None:
            on_step(t, x, u, quanta, frac)
    return ChainState(t=steps, config=cfg, theta=theta)


def step_ensemble(lat, quanta, frac, xs, us, counts=None, base_frac=None, amount=None):
    """Apply one addition to every replica row, in place.

    Row i receives mass us[i] at site xs[i]; all rows are then stabilized
    together. With `counts`/`base_frac`/`amount` given (fixed-amount
    chains) the fractional parts are recomputed from the counts and the
    quantum carry reconciled from mass conservation.
    """
    two_d = 2 * lat.d
    cell = 1.0 / two_d
    rows = np.arange(quanta.shape[0])
    if counts is not None:
        counts[rows, xs] += 1
        f_new = (base_frac[rows, xs] + counts[rows, xs] * amount) % cell
        f_new[f_new >= cell - SNAP] = 0.0
        carry = np.round((frac[rows, xs] + us - f_new) * two_d).astype(np.int64)
    else:
        total = frac[rows, xs] + us
        carry = np.floor(total / cell).astype(np.int64)
        f_new = total - carry * cell
        lo = f_new < 0.0
        carry[lo] -= 1
        f_new[lo] += cell
        hi = f_new >= cell - SNAP
        carry[hi] += 1
        f_new[hi] = 0.0
    frac[rows, xs] = f_new
    quanta[rows, xs] += carry
    btw.stabilize_many(lat, quanta)


def run_chain_ensemble(lat, quanta, frac, params, steps, rng, snapshots=()):
    """Evolve replica rows of (quanta, frac) in place for `steps` steps.

    Returns {t: (quanta copy, frac copy)} for each requested snapshot
    time. Fixed-amount mode tracks per-site addition counts per replica.
    """
    n = quanta.shape[0]
    fixed = params.mode == "fixed"
    counts = np.zeros_like(quanta) if fixed else None
    base = frac.copy() if fixed else None
    out = {}
    want = set(int(t) for t in snapshots)
    for t in range(1, steps + 1):
        xs = rng.integers(lat.n_sites, size=n)
        us = params.draw(rng, size=n)
        step_ensemble(lat, quanta, frac, xs, us,
                      counts=counts, base_frac=base, amount=params.a)
        if t in want:
            out[t] = (quanta.copy(), frac.copy())
    return out


# ---------------------------------------------------------------------------
# Coupling of two chains driven by shifted addition amounts.

def epoch_shape(lat, params):
    """(M, L) for the coupling: each epoch makes L = n_sites * M additions,
    M = ceil(4/(b-a)), so per-site discrepancies D = (eta-zeta)/M stay
    within (b-a)/4 and the shifted amount never wraps when the raw amount
    falls in the middle half of [a, b]."""
    if params.mode != "interval":
        raise DomainError("coupling needs an interval of amounts (a < b)")
    M = math.ceil(4.0 / (params.b - params.a))
    return M, lat.n_sites * M


def coupling_success_probability(lat, params):
    """Exact per-epoch probability of the coalescence event: every site
    drawn exactly M times and every amount in the middle half-interval,
    i.e. L!/(M!^m m^L) * (1/2)^L."""
    M, L = epoch_shape(lat, params)
    m = lat.n_sites
    balanced = Fraction(math.factorial(L), math.factorial(M) ** m * m ** L)
    return balanced * Fraction(1, 2) ** L


@dataclass
class EpochRecord:
    epoch: int
    o_occurred: bool
    coalesced: bool


@dataclass
class CouplingResult:
    coalesced: bool
    n_epochs: int
    M: int
    L: int
    records: list
    eta: CbtwConfig
    zeta: CbtwConfig


FRAC_MATCH_TOL = 1e-10


def _pair_coalesced(eta_q, eta_f, zeta_q, zeta_f):
    return bool(np.array_equal(eta_q, zeta_q)
                and np.max(np.abs(eta_f - zeta_f), initial=0.0) <= FRAC_MATCH_TOL)


def run_coupling(lat, eta0, zeta0, params, rng, max_epochs=200000):
    """Couple two chains until they coalesce (or give up).

    Both chains see the same random sites. The first chain draws amounts
    uniformly on [a, b]; the second receives the measure-preserving shift
    u_hat = ((u + D(x) - a) mod (b-a)) + a, where D is the per-site height
    gap frozen at the start of each epoch, divided by M. When an epoch
    draws every site exactly M times with every raw amount in the middle
    half of [a, b] (the event recorded as o_occurred), the shift never
    wraps and the chains agree exactly at the epoch end; the driver raises
    if that fails, since it would mean the dynamics are broken. Equality
    is only ever checked at epoch boundaries.
    """
    M, L = epoch_shape(lat, params)
    a, b = params.a, params.b
    mid_lo = (3 * a + b) / 4
    mid_hi = (a + 3 * b) / 4
    eta = eta0.copy()
    zeta = zeta0.copy()
    records = []
    for epoch in range(1, max_epochs + 1):
        D = (eta.heights() - zeta.heights()) / M
        seen = np.zeros(lat.n_sites, dtype=np.int64)
        all_mid = True
        for _ in range(L):
            x = int(rng.integers(lat.n_sites))
            u = float(rng.uniform(a, b))
            u_hat = ((u + D[x] - a) % (b - a)) + a
            _add_inplace(lat, eta.quanta, eta.frac, x, u)
            _add_inplace(lat, zeta.quanta, zeta.frac, x, u_hat)
            seen[x] += 1
            all_mid = all_mid and mid_lo <= u <= mid_hi
        o_occurred = bool(all_mid and (seen == M).all())
        coalesced = _pair_coalesced(eta.quanta, eta.frac, zeta.quanta, zeta.frac)
        records.append(EpochRecord(epoch, o_occurred, coalesced))
        if o_occurred and not coalesced:
            raise RuntimeError("coalescence event occurred but the chains differ; "
                               "the coupling construction is broken")
        if coalesced:
            return CouplingResult(True, epoch, M, L, records, eta, zeta)
    return CouplingResult(False, max_epochs, M, L, records, eta, zeta)


@dataclass
class CouplingEnsembleResult:
    n_replicas: int
    n_epochs: int
    M: int
    L: int
    o_events: np.ndarray
    o_verified: np.ndarray


def run_coupling_ensemble(lat, eta_quanta, eta_frac, zeta_quanta, zeta_frac,
                          params, n_epochs, rng):
    """Run many independent coupled pairs for a fixed number of epochs.

    The coalescence event depends only on the drawn sites and amounts,
    never on the state, so every (replica, epoch) cell is an independent
    trial with the exact per-epoch probability; this is the driver for
    frequency statistics. o_events marks the cells where the event
    occurred, o_verified the subset where the pair really did agree at the
    epoch end (they must all match).
    """
    M, L = epoch_shape(lat, params)
    a, b = params.a, params.b
    mid_lo = (3 * a + b) / 4
    mid_hi = (a + 3 * b) / 4
    n = eta_quanta.shape[0]
    cell = 1.0 / (2 * lat.d)
    rows = np.arange(n)
    o_events = np.zeros((n_epochs, n), dtype=bool)
    o_verified = np.zeros((n_epochs, n), dtype=bool)
    for e in range(n_epochs):
        D = ((eta_quanta - zeta_quanta) * cell + (eta_frac - zeta_frac)) / M
        seen = np.zeros((n, lat.n_sites), dtype=np.int64)
        all_mid = np.ones(n, dtype=bool)
        for _ in range(L):
            xs = rng.integers(lat.n_sites, size=n)
            us = rng.uniform(a, b, size=n)
            u_hat = ((us + D[rows, xs] - a) % (b - a)) + a
            step_ensemble(lat, eta_quanta, eta_frac, xs, us)
            step_ensemble(lat, zeta_quanta, zeta_frac, xs, u_hat)
            seen[rows, xs] += 1
            all_mid &= (us >= mid_lo) & (us <= mid_hi)
        occurred = all_mid & (seen == M).all(axis=1)
        same_q = (eta_quanta == zeta_quanta).all(axis=1)
        same_f = np.abs(eta_frac - zeta_frac).max(axis=1) <= FRAC_MATCH_TOL
        o_events[e] = occurred
        o_verified[e] = occurred & same_q & same_f
    return CouplingEnsembleResult(n, n_epochs, M, L, o_events, o_verified)


# ---------------------------------------------------------------------------
# Observables and measure-level experiments.

def phase_observable(config):
    """exp(4 d pi i * total mass), computed from the fractional parts.

    Whole quanta contribute full turns (each is worth 1/2d of mass, and
    the frequency is 4 d pi), so only the fractional parts move the
    phase. Under a fixed addition amount `a` the argument advances by
    exactly 4 d pi a per chain step, whatever the topplings do.
    """
    return complex(np.exp(4j * np.pi * config.d * float(np.sum(config.frac))))


def ergodic_average(lat, initial, amount, steps, observable, rng):
    """Time average of `observable` along the fixed-amount chain.

    The observable is called once per step with a live view of the
    configuration (copy it to keep it); values may be scalars or arrays.
    """
    state = initial.copy().with_tracking()
    total = None
    for _ in range(steps):
        x = int(rng.integers(lat.n_sites))
        _add_inplace(lat, state.quanta, state.frac, x, amount,
                     add_counts=state.add_counts, base_frac=state.base_frac)
        val = observable(state)
        total = np.asarray(val) * 1.0 if total is None else total + np.asarray(val)
    return total / steps


def translation_mixture_fourier(step, k, start, n_terms):
    """Fourier coefficient of the random-translate mixture, in closed form.

    Law of y = start + step * e, where e counts how many of n uniform
    coordinate choices hit each of the m coordinates, mixed over n uniform
    on {0..n_terms-1}. The coefficient at integer frequency vector k is
    f_k(start) * (1/n_terms) * (1 - alpha^n_terms)/(1 - alpha) with
    alpha = mean_j exp(2 pi i step k_j), and f_k(start) when alpha = 1.
    """
    k = np.asarray(k, dtype=np.int64)
    start = np.asarray(start, dtype=np.float64)
    if k.shape != start.shape:
        raise DomainError("frequency vector and start point must have the same length")
    fk = np.exp(2j * np.pi * float(np.dot(k, start)))
    alpha = complex(np.mean(np.exp(2j * np.pi * step * k)))
    if abs(1.0 - alpha) < 1e-14:
        return complex(fk)
    return complex(fk * (1.0 - alpha ** n_terms) / (n_terms * (1.0 - alpha)))


def translation_mixture_bound(step, k, n_terms):
    """Upper bound 2/(n_terms |1 - alpha|) on the coefficient modulus,
    infinite when alpha = 1."""
    k = np.asarray(k, dtype=np.int64)
    alpha = complex(np.mean(np.exp(2j * np.pi * step * k)))
    gap = abs(1.0 - alpha)
    if gap < 1e-14:
        return math.inf
    return 2.0 / (n_terms * gap)


def translation_mixture_fourier_mc(step, k, start, n_terms, n_samples, rng):
    """Monte Carlo estimate of the same coefficient; returns (estimate,
    standard error), the latter combining real and imaginary spread."""
    k = np.asarray(k, dtype=np.int64)
    start = np.asarray(start, dtype=np.float64)
    m = len(k)
    n = rng.integers(0, n_terms, size=n_samples)
    counts = rng.multinomial(n, [1.0 / m] * m)
    y = start[None, :] + step * counts
    vals = np.exp(2j * np.pi * (y @ k))
    est = complex(vals.mean())
    se = math.sqrt(vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / math.sqrt(n_samples)
    return est, se


@dataclass
class InvarianceResult:
    tv: float
    noise_floor: float
    n_samples: int


def invariance_experiment(lat, binning, n_samples, rng, recurrent=None):
    """Push one random addition step through uniform-allowed samples and
    compare the empirical law before and after.

    Sites are uniform, amounts uniform on [0, 1). The TV distance is
    reported next to the resolution floor measured between two
    independent uniform-allowed sample sets of the same size.
    """
    if recurrent is None:
        recurrent = btw.enumerate_recurrent(lat)
    q_ref, f_ref = sample_uniform_allowed_batch(lat, rng, n_samples, recurrent)
    href = Histogram.from_samples(lat.d, binning, q_ref, f_ref)
    quanta, frac = sample_uniform_allowed_batch(lat, rng, n_samples, recurrent)
    xs = rng.integers(lat.n_sites, size=n_samples)
    us = rng.uniform(0.0, 1.0, size=n_samples)
    step_ensemble(lat, quanta, frac, xs, us)
    hpush = Histogram.from_samples(lat.d, binning, quanta, frac)
    tv = estimate_tv(hpush, href)
    floor = tv_noise_floor(lat, binning, n_samples, rng, recurrent)
    return InvarianceResult(tv=tv, noise_floor=floor, n_samples=n_samples)


@dataclass
class RationalLimitResult:
    tv: float
    noise_floor: float
    amount: float
    t_chain: int
    n_samples: int


def rational_limit_test(lat, base, amount, t_chain, n_samples, rng,
                        binning=Binning(), recurrent=None):
    """Compare the chain at time t_chain against the predicted limit law.

    The fixed amount must be a quantum multiple l/2d; the prediction is
    the stabilized sum of `base` and l quanta at every site of a uniform
    recurrent configuration. Both sides are estimated with n_samples
    replicas and compared in TV, next to the floor between two
    independent draws of the prediction itself.
    """
    if quantum_multiple(amount, lat.d) is None:
        raise DomainError(f"amount {amount} is not a quantum multiple")
    if recurrent is None:
        recurrent = btw.enumerate_recurrent(lat)
    params = AdditionParams(amount, amount)
    quanta = np.tile(base.quanta, (n_samples, 1))
    frac = np.tile(base.frac, (n_samples, 1))
    run_chain_ensemble(lat, quanta, frac, params, t_chain, rng)
    h_chain = Histogram.from_samples(lat.d, binning, quanta, frac)
    q1, f1 = sample_rational_limit_batch(lat, base, amount, rng, n_samples, recurrent)
    h_limit = Histogram.from_samples(lat.d, binning, q1, f1)
    q2, f2 = sample_rational_limit_batch(lat, base, amount, rng, n_samples, recurrent)
    h_floor = Histogram.from_samples(lat.d, binning, q2, f2)
    return RationalLimitResult(
        tv=estimate_tv(h_chain, h_limit),
        noise_floor=estimate_tv(h_limit, h_floor),
        amount=amount, t_chain=t_chain, n_samples=n_samples)


@dataclass
class TvDecayResult:
    times: list
    tvs: list
    noise_floor: float
    slope: float


def tv_decay_experiment(lat, params, times, n_replicas, binning, rng, recurrent=None):
    """TV distance to the uniform-allowed law along the chain from zero.

    Snapshots the replica ensemble at the given times, measures TV to a
    uniform-allowed reference sample of the same size, and fits a line to
    log TV over time; the slope is the decay-rate estimate.
    """
    if recurrent is None:
        recurrent = btw.enumerate_recurrent(lat)
    times = sorted(int(t) for t in times)
    n = int(n_replicas)
    quanta = np.zeros((n, lat.n_sites), dtype=np.int64)
    frac = np.zeros((n, lat.n_sites), dtype=np.float64)
    snaps = run_chain_ensemble(lat, quanta, frac, params, times[-1], rng, snapshots=times)
    q_ref, f_ref = sample_uniform_allowed_batch(lat, rng, n, recurrent)
    href = Histogram.from_samples(lat.d, binning, q_ref, f_ref)
    tvs = [estimate_tv(Histogram.from_samples(lat.d, binning, *snaps[t]), href)
           for t in times]
    floor = tv_noise_floor(lat, binning, n, rng, recurrent)
    slope = float(np.polyfit(times, np.log(np.maximum(tvs, 1e-12)), 1)[0])
    return TvDecayResult(times=times, tvs=tvs, noise_floor=floor, slope=slope)
