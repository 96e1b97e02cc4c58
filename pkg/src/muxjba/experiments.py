"""End-to-end shot pipelines: qubit preparation, JBA readout, demodulation, decision."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit

from . import streams
from .analysis import (
    AnalysisError,
    SCurve,
    Separatrix,
    binomial_std,
    fit_separatrix,
    projected_histogram,
    split_clusters,
)
from .demod import DIGITIZER_RATE, default_window, demodulate_many
from .jba import (
    _shot_noise,
    _thresholds_for,
    bifurcation_drive,
    detect_latch,
    integrate_fields,
    readout_frame,
    steady_states,
)
from .params import CHANNEL_OFFSETS, DRIVE_OFFSET, READOUT_CARRIER, default_cell, dispersive_pulls
from .transmon import DEFAULT_RABI_FREQUENCY, DEFAULT_SIGMA, prep_pulses, pull_timeline, simulate_qubit
from .waveform import ComplexEnvelope, ReadoutPulseShape, make_readout_envelope, ssb_compose

__all__ = [
    "NOISE_PHOTONS",
    "PrepSpec",
    "PREPS",
    "ExperimentPlan",
    "ShotBlock",
    "simulate_block",
    "run_scurve_experiment",
    "run_rabi_experiment",
    "run_crosstalk_experiment",
    "run_simultaneous_readout",
    "run_iq_cloud",
    "model_separatrix",
    "default_readout_power",
    "fit_rabi",
    "calibrate_noise",
]

# Additive noise strength (mean undriven photon number) for which the cell-1
# ground-state S-curve spans 2.4 dB between 1 % and 99 % switching.
# Produced by calibrate_noise(n_shots=2000, seed=0, bracket=(0.35, 0.7)).
NOISE_PHOTONS = 0.487

DEFAULT_POWERS_DB = tuple(np.round(np.linspace(-13.0, 2.0, 25), 6))


@dataclass(frozen=True)
class PrepSpec:
    """Preparation: a 0-1 rotation (angle or equivalent duration), optional shelving."""

    theta: float = 0.0
    shelve: bool = False
    t_equiv: float | None = None

    def pulses(self, start=0.0, sigma=DEFAULT_SIGMA, rabi_frequency=DEFAULT_RABI_FREQUENCY):
        return prep_pulses(self.theta, self.shelve, start, sigma, self.t_equiv, rabi_frequency)


PREPS = {
    "ground": PrepSpec(0.0),
    "pi": PrepSpec(math.pi),
    "pi_shelved": PrepSpec(math.pi, True),
    "half_pi": PrepSpec(math.pi / 2),
    "half_pi_shelved": PrepSpec(math.pi / 2, True),
}


@dataclass
class ExperimentPlan:
    """Everything needed to run one of the experiments.

    Readout powers are in dB relative to each cell's upper bifurcation drive
    with the qubit in |0>. ``readout_powers_db`` maps cell id to the working
    power for Rabi, simultaneous and crosstalk runs; missing cells use
    :func:`default_readout_power`.
    """

    cells: list = field(default_factory=lambda: [default_cell(1)])
    readout: ReadoutPulseShape = field(default_factory=ReadoutPulseShape)
    powers_db: tuple = DEFAULT_POWERS_DB
    preps: tuple = ("ground", "pi", "pi_shelved")
    shelved_cells: tuple = (2, 4)
    readout_powers_db: dict = field(default_factory=dict)
    rabi_durations: tuple = tuple(np.round(np.arange(0.0, 40.01e-9, 2.0e-9), 15))
    rabi_frequency: float = DEFAULT_RABI_FREQUENCY
    n_shots: int = 2000
    seed: int = 0
    jba_coupling: float = 0.0
    noise_photons: float = NOISE_PHOTONS
    sigma: float = DEFAULT_SIGMA
    readout_gap: float = 0.0
    window_delay: float = 300e-9
    window_length: float = 1e-6
    latch_margin: float = 100e-9
    crosstalk_cells: tuple = (1, 2)
    chunk: int = 500
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_shots < 100:
            raise ValueError("n_shots must be >= 100")
        if len(self.cells) == 0:
            raise ValueError("plan needs at least one cell")
        if len(self.powers_db) == 0 or len(self.rabi_durations) == 0:
            raise ValueError("grids must be non-empty")
        self.seed = streams.as_seed(self.seed)

    def cell(self, cell_id):
        for c in self.cells:
            if c.cell_id == cell_id:
                return c
        raise KeyError(f"cell {cell_id} is not part of the plan")

    def channel_offset(self, cell):
        return CHANNEL_OFFSETS[cell.cell_id - 1]

    def drive_frequency(self, cell):
        return cell.f_r_bare - DRIVE_OFFSET

    def working_power(self, cell):
        if cell.cell_id in self.readout_powers_db:
            return float(self.readout_powers_db[cell.cell_id])
        return default_readout_power(cell, shelve=cell.cell_id in self.shelved_cells)


def default_readout_power(cell, shelve=False):
    """Midpoint (dB) between the |0> and excited bifurcation powers."""
    f0 = readout_frame(cell, 0)
    fe = readout_frame(cell, 2 if shelve else 1)
    excited_db = 20.0 * math.log10(bifurcation_drive(fe) / bifurcation_drive(f0))
    return 0.5 * excited_db


def _steady_amplitude(frame, eps, n):
    lin = 1j * 2 * np.pi * (frame.detuning_over_2pi + frame.kerr_over_2pi * n) + np.pi * frame.kappa_over_2pi
    return -1j * eps / lin


def model_separatrix(cell, eps_hold):
    """Perpendicular bisector between the |0> low and high branch amplitudes.

    Used when the measured IQ set is not bimodal enough to fit.
    """
    frame = readout_frame(cell, 0)
    roots = steady_states(frame, eps_hold)
    lo = _steady_amplitude(frame, eps_hold, roots[0])
    if len(roots) > 1:
        hi = _steady_amplitude(frame, eps_hold, roots[-1])
    else:
        # no high branch at this drive: use the low edge as the boundary scale
        hi = 2.0 * lo
    normal = np.array([(hi - lo).real, (hi - lo).imag])
    mid = 0.5 * (lo + hi)
    return Separatrix(normal, normal @ np.array([mid.real, mid.imag]))


@dataclass
class ShotBlock:
    """Raw per-shot results for one experimental point: shape (shots, cells)."""

    iq: np.ndarray
    latched: np.ndarray
    level_at_readout: np.ndarray


def _readout_horizon(plan):
    full = plan.readout.duration
    need = plan.readout.step_duration + plan.window_delay + plan.window_length + plan.latch_margin
    return min(full, need)


def _on_grid(t, dt):
    return math.ceil(t / dt - 1e-9) * dt


def simulate_block(plan, cells, preps, peaks_db, key, shots, prep_starts=None):
    """Simulate shots of a simultaneous readout of ``cells``.

    ``preps[i]`` is the PrepSpec of cell i, applied starting at
    ``prep_starts[i]`` (default 0); the readout of each cell begins when its
    own preparation ends. ``key`` is ``(experiment, condition, point)``.
    """
    dt = 1.0 / DIGITIZER_RATE
    m = len(cells)
    prep_starts = [0.0] * m if prep_starts is None else prep_starts
    pulses = [preps[i].pulses(prep_starts[i], plan.sigma, plan.rabi_frequency) for i in range(m)]
    r_starts = [
        _on_grid((p[-1].end if p else prep_starts[i]) + plan.readout_gap, dt) for i, p in enumerate(pulses)
    ]
    horizon = _readout_horizon(plan)
    t_end = max(r_starts) + horizon
    n_steps = int(round(t_end / dt))
    t = np.arange(n_steps) * dt

    frames, drive, offsets_ch, freqs, pulls, windows = [], [], [], [], [], []
    unit = make_readout_envelope(replace(plan.readout, peak_power_dB=0.0), DIGITIZER_RATE)
    n_read = int(round(horizon / dt))
    for i, cell in enumerate(cells):
        frames.append(readout_frame(cell))
        eps_ref = bifurcation_drive(readout_frame(cell, 0))
        row = np.zeros(n_steps, dtype=complex)
        k0 = int(round(r_starts[i] / dt))
        row[k0 : k0 + n_read] = unit.samples[:n_read] * eps_ref * 10.0 ** (peaks_db[i] / 20.0)
        drive.append(row)
        offsets_ch.append(plan.channel_offset(cell))
        freqs.append(plan.drive_frequency(cell))
        pulls.append(dispersive_pulls(cell))
        windows.append(default_window(plan.readout.step_duration, r_starts[i], plan.window_length))
    drive = np.array(drive)

    coupling = None
    if plan.jba_coupling and m > 1:
        fr = np.array(freqs)
        coupling = plan.jba_coupling * np.abs(fr[:, None] - fr[None, :])

    exp_code, cond, point = key
    shots = list(shots)
    det = np.empty((len(shots), m, n_steps))
    levels = np.empty((len(shots), m), dtype=np.int8)
    for s_i, s in enumerate(shots):
        for i, cell in enumerate(cells):
            rng = streams.stream(plan.seed, exp_code, cond, point, cell.cell_id, s, streams.QUBIT)
            traj = simulate_qubit(pulses[i], cell, t_end, rng=rng)
            det[s_i, i] = pull_timeline(traj, pulls[i]).at(t)
            levels[s_i, i] = traj.level_at(r_starts[i])
    noise = None
    if plan.noise_photons > 0:
        noise = _shot_noise(
            plan.seed,
            [(exp_code, cond, point, 0, s, streams.FIELD) for s in shots],
            (m, n_steps),
        )
    a = integrate_fields(
        frames,
        drive,
        dt,
        detuning_offsets=det,
        noise_photons=plan.noise_photons,
        noise=noise,
        coupling=coupling,
        drive_frequencies=freqs,
    )
    latched = np.empty((len(shots), m), dtype=bool)
    for i in range(m):
        thr = _thresholds_for(frames[i], drive[i], frames[i].detuning_over_2pi + det[:, i])
        latched[:, i], _ = detect_latch(np.abs(a[:, i]) ** 2, thr, dt)

    # output record: every resonator at its own sideband offset, summed
    carrier = np.exp(2j * np.pi * np.array(offsets_ch)[:, None] * t[None, :])
    record = np.real(np.einsum("smk,mk->sk", a, carrier))
    iq = np.empty((len(shots), m), dtype=complex)
    for i in range(m):
        iq[:, i] = demodulate_many(record, offsets_ch[i], windows[i], DIGITIZER_RATE, 0.0)
    return ShotBlock(iq, latched, levels)


def _run_points(plan, tasks, threads):
    """Run (key, cells, preps, peaks_db, prep_starts) tasks in shot chunks."""
    jobs = []
    for task_id, (key, cells, preps, peaks, starts) in enumerate(tasks):
        for s0 in range(0, plan.n_shots, plan.chunk):
            shots = range(s0, min(plan.n_shots, s0 + plan.chunk))
            jobs.append((task_id, s0, key, cells, preps, peaks, starts, shots))

    def work(job):
        task_id, s0, key, cells, preps, peaks, starts, shots = job
        return task_id, s0, simulate_block(plan, cells, preps, peaks, key, shots, starts)

    threads = max(1, int(threads or 1))
    if threads == 1:
        results = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    merged = {}
    for task_id, s0, block in sorted(results, key=lambda r: (r[0], r[1])):
        merged.setdefault(task_id, []).append(block)
    return [
        ShotBlock(
            np.concatenate([b.iq for b in merged[k]]),
            np.concatenate([b.latched for b in merged[k]]),
            np.concatenate([b.level_at_readout for b in merged[k]]),
        )
        for k in range(len(tasks))
    ]


def _separatrix_for(iq, cell, eps_hold):
    """Fisher separatrix from a pooled IQ set, falling back to the model."""
    pts = np.column_stack([iq.real, iq.imag])
    try:
        low, high = split_clusters(pts)
        return fit_separatrix(low, high), "fit"
    except AnalysisError:
        return model_separatrix(cell, eps_hold), "model"


def _hold_drive(plan, cell, power_db):
    eps_ref = bifurcation_drive(readout_frame(cell, 0))
    return eps_ref * 10.0 ** (power_db / 20.0) * math.sqrt(plan.readout.latch_fraction)


@dataclass
class SCurveResult:
    curves: dict
    agreement: dict
    separatrices: dict
    iq: dict
    latched: dict

    def agreement_at(self, cell_id, prep, index):
        return self.agreement[cell_id][prep][index]


def run_scurve_experiment(plan, threads=1):
    """Switching probability versus readout power for each cell and preparation.

    Cells are read one at a time. Decisions come from a separatrix fitted to
    all IQ points of a cell; their agreement with the trajectory latch flag
    is reported per point.
    """
    code = streams.EXPERIMENT_CODES["scurve"]
    tasks, index = [], []
    for cell in plan.cells:
        for c_i, name in enumerate(plan.preps):
            for j, pdb in enumerate(plan.powers_db):
                tasks.append(((code, c_i, j), [cell], [PREPS[name]], [pdb], None))
                index.append((cell.cell_id, name, j))
    blocks = _run_points(plan, tasks, threads)

    curves, agreement, seps, iqs, latched = {}, {}, {}, {}, {}
    powers = np.asarray(plan.powers_db, dtype=float)
    for cell in plan.cells:
        cid = cell.cell_id
        sel = [b for (c, _, _), b in zip(index, blocks) if c == cid]
        pooled = np.concatenate([b.iq[:, 0] for b in sel])
        sep, _ = _separatrix_for(pooled, cell, _hold_drive(plan, cell, 0.0))
        seps[cid] = sep
        curves[cid], agreement[cid], iqs[cid], latched[cid] = {}, {}, {}, {}
        for name in plan.preps:
            p, agree, cloud, flags = [], [], [], []
            for (c, nm, j), b in zip(index, blocks):
                if c != cid or nm != name:
                    continue
                pts = np.column_stack([b.iq[:, 0].real, b.iq[:, 0].imag])
                dec = sep.decide(pts)
                p.append(dec.mean())
                agree.append(float(np.mean(dec == b.latched[:, 0])))
                cloud.append(b.iq[:, 0])
                flags.append(b.latched[:, 0])
            curves[cid][name] = SCurve(powers, np.array(p), np.full(len(p), plan.n_shots))
            agreement[cid][name] = np.array(agree)
            iqs[cid][name] = np.array(cloud)
            latched[cid][name] = np.array(flags)
    return SCurveResult(curves, agreement, seps, iqs, latched)


def _stagger(plan, cells, preps):
    """Sequential control pulses: each cell starts when the previous one ends."""
    starts, t = [], 0.0
    for prep in preps:
        starts.append(t)
        pulses = prep.pulses(t, plan.sigma, plan.rabi_frequency)
        t = pulses[-1].end if pulses else t
    return starts


def _decide_multi(plan, cells, blocks):
    """Per-cell separatrices fitted on all blocks; returns (seps, decisions list)."""
    seps = {}
    for i, cell in enumerate(cells):
        pooled = np.concatenate([b.iq[:, i] for b in blocks])
        seps[cell.cell_id], _ = _separatrix_for(pooled, cell, _hold_drive(plan, cell, plan.working_power(cell)))
    decisions = []
    for b in blocks:
        dec = np.column_stack(
            [
                seps[cell.cell_id].decide(np.column_stack([b.iq[:, i].real, b.iq[:, i].imag]))
                for i, cell in enumerate(cells)
            ]
        )
        decisions.append(dec)
    return seps, decisions


def _rabi_model(t, offset, amplitude, period, phase):
    return offset - amplitude * np.cos(2 * np.pi * t / period + phase)


def fit_rabi(durations, p):
    """Sinusoid fit ``offset - amplitude cos(2 pi t / period + phase)``.

    Returns dict with contrast (2 * amplitude) and period.
    """
    t = np.asarray(durations, dtype=float)
    p = np.asarray(p, dtype=float)
    # initial period from the dominant FFT bin of the (zero-padded) signal
    n = 8 * len(t)
    spec = np.abs(np.fft.rfft(p - p.mean(), n))
    freqs = np.fft.rfftfreq(n, t[1] - t[0])
    f0 = freqs[1 + np.argmax(spec[1:])]
    guess = (p.mean(), 0.5 * (p.max() - p.min()), 1.0 / f0, 0.0)
    popt, pcov = curve_fit(_rabi_model, t, p, p0=guess, maxfev=20000)
    offset, amp, period, phase = popt
    if amp < 0:
        amp, phase = -amp, phase + np.pi
    err = np.sqrt(np.diag(pcov)) if np.all(np.isfinite(pcov)) else np.full(4, np.nan)
    return {
        "offset": float(offset),
        "contrast": float(2 * amp),
        "period": float(abs(period)),
        "phase": float(np.mod(phase, 2 * np.pi)),
        "period_std": float(err[2]),
    }


@dataclass
class RabiResult:
    durations: np.ndarray
    p: dict
    fits: dict
    agreement: dict


def run_rabi_experiment(plan, threads=1, fit=True):
    """Simultaneous Rabi oscillations of all plan cells.

    For each equivalent duration every cell gets a 0-1 pulse of that duration
    (plus shelving for ``plan.shelved_cells``); control pulses are staggered
    in time and readouts overlap.
    """
    code = streams.EXPERIMENT_CODES["rabi"]
    cells = list(plan.cells)
    peaks = [plan.working_power(c) for c in cells]
    tasks = []
    for j, te in enumerate(plan.rabi_durations):
        preps = [PrepSpec(t_equiv=float(te), shelve=c.cell_id in plan.shelved_cells) for c in cells]
        tasks.append(((code, 0, j), cells, preps, peaks, _stagger(plan, cells, preps)))
    blocks = _run_points(plan, tasks, threads)
    _, decisions = _decide_multi(plan, cells, blocks)
    durations = np.asarray(plan.rabi_durations, dtype=float)
    p, fits, agree = {}, {}, {}
    for i, cell in enumerate(cells):
        p[cell.cell_id] = np.array([d[:, i].mean() for d in decisions])
        agree[cell.cell_id] = np.array([np.mean(d[:, i] == b.latched[:, i]) for d, b in zip(decisions, blocks)])
        if fit:
            try:
                fits[cell.cell_id] = fit_rabi(durations, p[cell.cell_id])
            except (RuntimeError, ValueError):
                fits[cell.cell_id] = None
    return RabiResult(durations, p, fits, agree)


@dataclass
class CrosstalkResult:
    p_target_when_ground: float
    p_target_when_excited: float
    delta_p: float
    sigma: float
    n_shots: int
    shots_for_resolution: dict

    @property
    def significance(self):
        return abs(self.delta_p) / self.sigma if self.sigma > 0 else math.inf


def run_crosstalk_experiment(plan, threads=1, resolution=0.0005):
    """Change of the target's switching probability with the source qubit state.

    ``plan.crosstalk_cells = (source, target)``; the target is prepared in an
    equal superposition, the source in |0> or |1>.
    """
    code = streams.EXPERIMENT_CODES["crosstalk"]
    src, tgt = (plan.cell(c) for c in plan.crosstalk_cells)
    cells = [src, tgt]
    peaks = [plan.working_power(c) for c in cells]
    tasks = []
    for cond, src_prep in enumerate((PREPS["ground"], PREPS["pi"])):
        preps = [src_prep, PREPS["half_pi"]]
        tasks.append(((code, cond, 0), cells, preps, peaks, _stagger(plan, cells, preps)))
    blocks = _run_points(plan, tasks, threads)
    _, decisions = _decide_multi(plan, cells, blocks)
    p0 = float(decisions[0][:, 1].mean())
    p1 = float(decisions[1][:, 1].mean())
    n = plan.n_shots
    sigma = math.sqrt(binomial_std(p0, n) ** 2 + binomial_std(p1, n) ** 2)
    pbar = 0.5 * (p0 + p1)
    needed = math.ceil(2 * pbar * (1 - pbar) / resolution**2) if 0 < pbar < 1 else 0
    return CrosstalkResult(p0, p1, p1 - p0, sigma, n, {"resolution": resolution, "shots": needed})


@dataclass
class SimultaneousResult:
    cell_ids: list
    iq: np.ndarray
    latched: np.ndarray
    decisions: np.ndarray
    separatrices: dict
    histograms: dict
    p_switch: dict
    separation_in_std: dict
    drive_waveform: ComplexEnvelope


def _histogram(sep, iq_col):
    proj = sep.project(np.column_stack([iq_col.real, iq_col.imag])) - sep.offset
    spread = np.std(proj)
    counts, edges = projected_histogram(proj, max(spread, 1e-12) / 10.0)
    return counts, edges


def _bimodal_separation(sep, iq_col, decided):
    proj = sep.project(np.column_stack([iq_col.real, iq_col.imag]))
    a, b = proj[~decided], proj[decided]
    if len(a) < 2 or len(b) < 2:
        return float("nan")
    return float((b.mean() - a.mean()) / math.sqrt(0.5 * (a.var() + b.var())))


def run_simultaneous_readout(plan, prep="half_pi", threads=1):
    """Four-channel readout from a single summed output record.

    Every cell gets ``prep`` (shelving added for ``plan.shelved_cells``) and is
    read at its working power. Returns IQ clouds, separatrices and histograms
    along each separatrix normal.
    """
    code = streams.EXPERIMENT_CODES["simultaneous"]
    cells = list(plan.cells)
    base = PREPS[prep]
    preps = [replace(base, shelve=base.shelve or (c.cell_id in plan.shelved_cells and base.theta != 0)) for c in cells]
    peaks = [plan.working_power(c) for c in cells]
    starts = _stagger(plan, cells, preps)
    block = _run_points(plan, [((code, 0, 0), cells, preps, peaks, starts)], threads)[0]
    seps, decisions = _decide_multi(plan, cells, [block])
    dec = decisions[0]
    hists, p, sep_std = {}, {}, {}
    for i, cell in enumerate(cells):
        cid = cell.cell_id
        hists[cid] = _histogram(seps[cid], block.iq[:, i])
        p[cid] = float(dec[:, i].mean())
        sep_std[cid] = _bimodal_separation(seps[cid], block.iq[:, i], dec[:, i])
    waveform = _drive_waveform(plan, cells, peaks, starts, preps)
    return SimultaneousResult(
        [c.cell_id for c in cells], block.iq, block.latched, dec, seps, hists, p, sep_std, waveform
    )


def _drive_waveform(plan, cells, peaks, starts, preps):
    """Composed multi-tone readout drive (in units of each cell's bifurcation drive)."""
    dt = 1.0 / DIGITIZER_RATE
    channels = []
    for cell, pdb, st, prep in zip(cells, peaks, starts, preps):
        pulses = prep.pulses(st, plan.sigma, plan.rabi_frequency)
        r0 = _on_grid((pulses[-1].end if pulses else st) + plan.readout_gap, dt)
        env = make_readout_envelope(replace(plan.readout, peak_power_dB=pdb), DIGITIZER_RATE, t0=r0)
        channels.append((plan.channel_offset(cell), env))
    return ssb_compose(channels)


def run_iq_cloud(plan, prep="half_pi", threads=1):
    """Single-cell IQ density after a (pi/2) rotation (first plan cell)."""
    sub = replace(plan, cells=[plan.cells[0]], shelved_cells=tuple(plan.shelved_cells))
    return run_simultaneous_readout(sub, prep, threads)


def calibrate_noise(cell=None, target_width=2.4, n_shots=2000, seed=0, powers_db=DEFAULT_POWERS_DB, bracket=(0.3, 1.0), tol=0.02, readout=None):
    """Noise strength (photons) giving the target 1-99 % ground S-curve width.

    The width is measured exactly as in :func:`run_scurve_experiment` (IQ
    decisions on the experiment power grid) with the thermal population set
    to zero. Bisection in log(noise) with common random numbers.
    """
    from .analysis import scurve_width

    cell = default_cell(1) if cell is None else cell
    cold = cell.with_(thermal_excited_population=0.0)
    readout = ReadoutPulseShape() if readout is None else readout

    def width(noise):
        plan = ExperimentPlan(
            cells=[cold], readout=readout, powers_db=tuple(powers_db), preps=("ground",),
            n_shots=n_shots, seed=seed, noise_photons=noise,
        )
        s = run_scurve_experiment(plan).curves[cold.cell_id]["ground"]
        try:
            return scurve_width(s)
        except AnalysisError:
            # a curve already above 1 % at the lowest power is too wide
            return math.inf

    lo, hi = bracket
    w_lo, w_hi = width(lo), width(hi)
    if not (w_lo <= target_width <= w_hi):
        raise ValueError(f"target width not bracketed: {w_lo:.2f}..{w_hi:.2f} dB")
    while hi / lo > 1.0 + tol:
        mid = math.sqrt(lo * hi)
        if width(mid) < target_width:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
