"""Scenario configuration, Monte Carlo runner, metrics and result files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import baselines
from .channel import ArrayGeometry, dft_matrix, sample_channel, to_physical
from .decoders import THRESHOLD_REL, MlpDecoder, SearchDecoder, decode_mimo, top_l_paths
from .gf2codes import CodeSpec, is_injective_over_supports
from .measurement import LinkBudget, acquire, build_combiners, build_precoders, db_to_linear
from .mlp import load_model

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

METHODS = ("source_search", "source_dnn", "source_dnn_sd", "cs_search", "sweep_80211ad")
SOURCE_METHODS = ("source_search", "source_dnn", "source_dnn_sd")
# Stand-in resolution for an ideal ADC when picking the nearest DNN-sd model.
IDEAL_BITS_PROXY = 16


class ConfigError(ValueError):
    pass


class ModelMissingError(FileNotFoundError):
    pass


def _bits(value):
    """Normalise an ADC resolution: None / inf / "inf" mean ideal."""
    if value is None:
        return None
    if isinstance(value, str):
        if value.lower() in ("inf", "infinite", "ideal", "none"):
            return None
        value = float(value)
    if isinstance(value, float) and math.isinf(value):
        return None
    b = int(value)
    if b != value or b < 1:
        raise ConfigError(f"ADC bits must be a positive integer or inf, got {value!r}")
    return b


@dataclass
class ScenarioConfig:
    n_r: int
    n_t: int
    L: int
    rx_code: CodeSpec
    tx_code: CodeSpec
    methods: tuple[str, ...] = ("source_search",)
    snr_grid_db: list[float] | None = None
    energy_grid_mj: list[float] | None = None
    adc_bits: list = field(default_factory=lambda: [None])
    trials: int = 2000
    seed: int = 0
    alpha_max: float = 1.0
    link: LinkBudget = field(default_factory=LinkBudget)
    noise: str = "gaussian"
    v_fs: float | None = None
    overlap: str = "max"
    cs_decoder: str = "auto"
    noise_free: bool = False
    uniform_support: bool = False
    array_gain: bool = False
    rx_model: str | None = None
    tx_model: str | None = None
    dnn_sd_dir: str | None = None
    workers: int = 1
    name: str = ""

    def __post_init__(self):
        if isinstance(self.rx_code, str):
            self.rx_code = CodeSpec.parse(self.rx_code)
        if isinstance(self.tx_code, str):
            self.tx_code = CodeSpec.parse(self.tx_code)
        if isinstance(self.methods, str):
            self.methods = (self.methods,)
        self.methods = tuple(self.methods)
        if not isinstance(self.adc_bits, (list, tuple)):
            self.adc_bits = [self.adc_bits]
        self.adc_bits = [_bits(b) for b in self.adc_bits]
        if isinstance(self.link, dict):
            self.link = LinkBudget(**self.link)

    @property
    def full_scale(self) -> float:
        return self.v_fs if self.v_fs is not None else self.L * self.alpha_max

    @property
    def gain_db(self) -> float:
        """Array gain folded into the per-sample SNR when ``array_gain`` is set."""
        return 10 * math.log10(self.n_r * self.n_t) if self.array_gain else 0.0

    @property
    def axis(self) -> str:
        return "energy" if self.energy_grid_mj is not None else "snr"

    @property
    def grid(self) -> list[float]:
        return list(self.energy_grid_mj if self.axis == "energy" else self.snr_grid_db)

    def validate(self, check_codes: bool = True) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if min(self.n_r, self.n_t, self.L) < 1:
            raise ConfigError("n_r, n_t and L must be positive")
        if (self.snr_grid_db is None) == (self.energy_grid_mj is None):
            raise ConfigError("give exactly one of snr_grid_db and energy_grid_mj")
        if not self.grid:
            raise ConfigError("empty grid")
        if self.energy_grid_mj is not None and min(self.energy_grid_mj) <= 0:
            raise ConfigError("energy grid must be positive")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if self.noise not in ("gaussian", "uniform"):
            raise ConfigError(f"unknown noise family {self.noise!r}")
        if self.overlap not in ("max", "mean"):
            raise ConfigError(f"overlap statistic must be max or mean, got {self.overlap!r}")
        for side, spec, n in (("rx", self.rx_code, self.n_r), ("tx", self.tx_code, self.n_t)):
            if spec.n != n:
                raise ConfigError(f"{side} code {spec.label} has {spec.n} columns, array has {n}")
            if check_codes and not is_injective_over_supports(spec.matrix(), min(self.L, n)):
                raise ConfigError(f"{side} code {spec.label} is not injective for L={self.L}")
        if "source_dnn" in self.methods:
            for side, path, spec in (("rx", self.rx_model, self.rx_code),
                                     ("tx", self.tx_model, self.tx_code)):
                if path is None and not _is_trivial(spec):
                    raise ModelMissingError(f"source_dnn needs a {side} model file")
                if path is not None and not os.path.exists(path):
                    raise ModelMissingError(f"{side} model file {path} not found")
        if "source_dnn_sd" in self.methods:
            if self.dnn_sd_dir is None or not (Path(self.dnn_sd_dir) / "manifest.json").exists():
                raise ModelMissingError("source_dnn_sd needs dnn_sd_dir with a manifest.json")


def _is_trivial(spec: CodeSpec) -> bool:
    G = spec.matrix()
    return G.shape[0] == G.shape[1] and np.array_equal(G, np.eye(G.shape[0], dtype=G.dtype))


PRESETS = {
    "15x31": dict(n_r=15, n_t=31, L=1, rx_code="hamming:4", tx_code="hamming:5",
                  methods=("source_search", "cs_search", "sweep_80211ad"),
                  energy_grid_mj=[1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1]),
    "23x23": dict(n_r=23, n_t=23, L=3, rx_code="golay23", tx_code="golay23",
                  methods=("source_search", "cs_search"),
                  snr_grid_db=[-10.0, -5.0, 0.0, 5.0, 10.0]),
    "15x32": dict(n_r=15, n_t=32, L=3, rx_code="golay23:15", tx_code="rm:2:5",
                  methods=("source_search", "cs_search"),
                  snr_grid_db=[-10.0, -5.0, 0.0, 5.0, 10.0]),
    "23x1": dict(n_r=23, n_t=1, L=3, rx_code="golay23", tx_code="identity:1",
                 methods=("source_search",), snr_grid_db=[-15.0, -5.0, 5.0, 15.0]),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    kw = dict(PRESETS[name], name=name)
    kw.update(overrides)
    return ScenarioConfig(**kw)


_CFG_FIELDS = {f.name for f in fields(ScenarioConfig)}


def load_config(path, validate: bool = True) -> ScenarioConfig:
    """Read a TOML scenario file.

    Top-level keys mirror ScenarioConfig; ``preset`` seeds the defaults,
    ``method`` is accepted for a single method, ``[link]`` and ``[dnn]``
    (keys rx_model, tx_model, sd_dir) are tables.  Model paths are resolved
    relative to the file.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    base = path.parent
    kw = {}
    name = raw.pop("preset", None)
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        kw.update(PRESETS[name], name=name)
    if "method" in raw:
        raw["methods"] = [raw.pop("method")]
    dnn = raw.pop("dnn", {})
    for key, target in (("rx_model", "rx_model"), ("tx_model", "tx_model"), ("sd_dir", "dnn_sd_dir")):
        if key in dnn:
            raw[target] = str(base / dnn[key])
    if "link" in raw:
        try:
            raw["link"] = LinkBudget(**raw["link"])
        except TypeError as exc:
            raise ConfigError(f"bad [link] table: {exc}") from exc
    unknown = set(raw) - _CFG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kw.update(raw)
    if "snr_grid_db" in raw:
        kw.pop("energy_grid_mj", None)
    if "energy_grid_mj" in raw:
        kw.pop("snr_grid_db", None)
    try:
        cfg = ScenarioConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if validate:
        cfg.validate()
    return cfg


# --- metrics -----------------------------------------------------------------

def _entries(q):
    return q.entries if hasattr(q, "entries") else np.asarray(q, dtype=complex)


def normalized_mse(q_true, q_hat) -> float:
    """||Q - Q_hat||_F^2 / ||Q||_F^2; NaN when the true channel is zero."""
    Q = _entries(q_true)
    Qh = np.asarray(q_hat, dtype=complex).reshape(Q.shape)
    den = float(np.sum(np.abs(Q) ** 2))
    if den == 0:
        return math.nan
    return float(np.sum(np.abs(Q - Qh) ** 2)) / den


def path_detection(q_true, q_hat, L: int) -> int:
    """Number of true paths among the L strongest nonzero entries of the estimate."""
    Q = _entries(q_true)
    Qh = np.asarray(q_hat, dtype=complex).reshape(Q.shape)
    true = set(zip(*np.nonzero(Q)))
    found = {(r, t) for r, t, g in top_l_paths(Qh, L) if g != 0}
    return len(true & found)


def capacity(Q, snr_linear: float) -> float:
    """Equal-power MIMO capacity sum_i log2(1 + snr/n_t * s_i^2)."""
    Q = np.atleast_2d(np.asarray(Q, dtype=complex))
    s = np.linalg.svd(Q, compute_uv=False)
    return float(np.sum(np.log2(1 + snr_linear / Q.shape[1] * s**2)))


def outage_rate(Q, detected_ok: bool, snr_linear: float) -> float:
    return capacity(Q, snr_linear) if detected_ok else 0.0


@dataclass
class MetricsRecord:
    method: str
    energy_mj: float
    snr_db: float
    adc_bits: int | None
    n_measurements: int
    normalized_mse: float
    p_detect: list[float]
    outage_rate_bps_hz: float
    perfect_csi_rate_bps_hz: float
    trials: int
    median_mse: float = math.nan
    zero_channel_trials: int = 0
    beam_snr_db: float = math.nan


def _cost(method: str, cfg: ScenarioConfig, m_src: int, o_t: float, o_r: float):
    """(measurements, o_t, o_r) each method spends."""
    if method in SOURCE_METHODS:
        return m_src, o_t, o_r
    if method == "cs_search":
        return m_src, 1.0, 1.0
    return cfg.n_r + cfg.n_t, 1.0, 1.0


def measurement_report(cfg: ScenarioConfig) -> dict:
    m_src = cfg.rx_code.m * cfg.tx_code.m
    exhaustive = cfg.n_r * cfg.n_t
    out = {"exhaustive": exhaustive, "source_coding": m_src,
           "reduction": 1 - m_src / exhaustive, "sweep_80211ad": cfg.n_r + cfg.n_t}
    return out


class _Setup:
    """Everything a trial needs that does not depend on the trial."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.U_r = dft_matrix(ArrayGeometry(cfg.n_r))
        self.U_t = dft_matrix(ArrayGeometry(cfg.n_t))
        self.G_r = cfg.rx_code.matrix()
        self.G_t = cfg.tx_code.matrix()
        self.W = build_combiners(self.G_r, self.U_r)
        self.F = build_precoders(self.G_t, self.U_t)
        self.m_src = self.W.m * self.F.m
        self.o_r = self.W.overlap(cfg.overlap)
        self.o_t = self.F.overlap(cfg.overlap)
        self.decoders = {}
        Lr, Lt = min(cfg.L, cfg.n_r), min(cfg.L, cfg.n_t)
        if "source_search" in cfg.methods:
            self.decoders["source_search"] = (SearchDecoder(self.G_r, Lr), SearchDecoder(self.G_t, Lt))
        if "source_dnn" in cfg.methods:
            self.decoders["source_dnn"] = (self._mlp_or_search(cfg.rx_model, self.G_r, Lr),
                                           self._mlp_or_search(cfg.tx_model, self.G_t, Lt))
        self.sd_models = []
        if "source_dnn_sd" in cfg.methods:
            self.sd_models = self._load_sd(Path(cfg.dnn_sd_dir), Lr, Lt)
        # grid points -> (energy, reference snr, per-method beam snr)
        self.points = []
        for g in cfg.grid:
            if cfg.noise_free:
                e, snr_ref = math.inf, math.inf
            elif cfg.axis == "snr":
                snr_ref = db_to_linear(g)
                e = cfg.link.energy(self.m_src, self.o_t, self.o_r, snr_ref)
            else:
                e = g
                snr_ref = cfg.link.snr_for_energy(e, self.m_src, self.o_t, self.o_r)
            beam = {}
            for meth in cfg.methods:
                if cfg.noise_free:
                    beam[meth] = math.inf
                else:
                    m, ot, orr = _cost(meth, cfg, self.m_src, self.o_t, self.o_r)
                    s = cfg.link.snr_for_energy(e, m, ot, orr)
                    if not s > 0:
                        raise ConfigError(f"grid point {g} leaves {meth} no energy")
                    beam[meth] = 10 * math.log10(s) + cfg.gain_db
            if not math.isinf(snr_ref):
                snr_ref *= 10 ** (cfg.gain_db / 10)
            self.points.append((e, snr_ref, beam))

    def _mlp_or_search(self, path, G, L):
        if path is None:
            return SearchDecoder(G, L)
        if not os.path.exists(path):
            raise ModelMissingError(f"model file {path} not found")
        return MlpDecoder(load_model(path), G)

    def _load_sd(self, root: Path, Lr: int, Lt: int):
        manifest = root / "manifest.json"
        if not manifest.exists():
            raise ModelMissingError(f"{manifest} not found")
        entries = json.loads(manifest.read_text())["models"]
        out = []
        for e in entries:
            rx = self._mlp_or_search(None if e.get("rx") is None else str(root / e["rx"]), self.G_r, Lr)
            tx = self._mlp_or_search(None if e.get("tx") is None else str(root / e["tx"]), self.G_t, Lt)
            out.append((float(e["snr_db"]), _bits(e.get("adc_bits")), rx, tx))
        if not out:
            raise ModelMissingError(f"{manifest} lists no models")
        return out

    def nearest_sd(self, snr_db: float, bits):
        def key(item):
            s, b = item[0], item[1]
            b_eval = IDEAL_BITS_PROXY if bits is None else bits
            b_mod = IDEAL_BITS_PROXY if b is None else b
            ds = 0.0 if math.isinf(snr_db) and math.isinf(s) else snr_db - s
            if math.isinf(ds):
                ds = 1e6
            return (ds**2 + (b_eval - b_mod) ** 2, s, b_mod)
        best = min(self.sd_models, key=key)
        return best[2], best[3]


def _trial(setup: _Setup, t: int):
    """One channel draw scored by every (grid point, bits, method) combination."""
    cfg = setup.cfg
    ch = sample_channel(cfg.n_r, cfg.n_t, cfg.L, cfg.alpha_max,
                        np.random.default_rng([cfg.seed, t]), cfg.uniform_support)
    Qa = ch.entries
    Q = to_physical(Qa, setup.U_r, setup.U_t)
    n_true = ch.n_paths
    threshold = THRESHOLD_REL * cfg.alpha_max
    rows = []
    for e, snr_ref, beam in setup.points:
        cap = capacity(Q, snr_ref) if not math.isinf(snr_ref) else math.inf
        for bits in cfg.adc_bits:
            bits = None if cfg.noise_free else bits
            for meth in cfg.methods:
                snr_db = beam[meth]
                rng = np.random.default_rng([cfg.seed, t, 1])
                q_hat = _estimate(setup, meth, Q, snr_db, bits, rng, np.random.default_rng([cfg.seed, t, 2]))
                q_hat = np.asarray(q_hat, dtype=complex)
                q_hat[np.abs(q_hat) < threshold] = 0
                k = path_detection(Qa, q_hat, cfg.L)
                rows.append((normalized_mse(Qa, q_hat), k, n_true,
                             cap if k >= n_true else 0.0, cap))
    return rows


def _estimate(setup: _Setup, meth: str, Q, snr_db, bits, rng, bf_rng):
    cfg = setup.cfg
    v_fs = cfg.full_scale
    if meth in ("source_search", "source_dnn"):
        rx, tx = setup.decoders[meth]
        ms = acquire(Q, setup.W, setup.F, snr_db, bits, v_fs, rng, cfg.noise)
        return decode_mimo(ms, rx, tx).q_hat
    if meth == "source_dnn_sd":
        rx, tx = setup.nearest_sd(snr_db, bits)
        ms = acquire(Q, setup.W, setup.F, snr_db, bits, v_fs, rng, cfg.noise)
        return decode_mimo(ms, rx, tx).q_hat
    if meth == "cs_search":
        W = baselines.cs_random_beamformers(cfg.n_r, setup.W.m, bf_rng)
        F = baselines.cs_random_beamformers(cfg.n_t, setup.F.m, bf_rng)
        S = baselines.build_sensing_matrix(W, F, setup.U_r, setup.U_t)
        ms = acquire(Q, W, F, snr_db, bits, v_fs, rng, cfg.noise)
        return baselines.cs_decode(ms.observed, S, cfg.L, cfg.cs_decoder)
    if meth == "sweep_80211ad":
        # the idle side's single element sees each path at 1/sqrt(n) amplitude
        v_sweep = v_fs / math.sqrt(min(cfg.n_r, cfg.n_t))
        res = baselines.sector_sweep_80211ad(Q, setup.U_r, setup.U_t, snr_db, bits, rng,
                                             v_sweep, cfg.noise)
        q_hat = np.zeros((cfg.n_r, cfg.n_t), dtype=complex)
        if not res.no_signal:
            q_hat[res.rx_bin, res.tx_bin] = res.gain
        return q_hat
    raise ConfigError(f"unknown method {meth!r}")


def run_experiment(cfg: ScenarioConfig, progress=None) -> list[MetricsRecord]:
    """Monte Carlo over ``cfg.trials`` channel draws; one record per (grid point, bits, method).

    Trial t draws its channel from seed (cfg.seed, t) and its noise from
    (cfg.seed, t, 1), so every grid point, ADC resolution and method sees
    the same channel and the same underlying noise realisation.  Output is
    deterministic for any worker count.
    """
    setup = _Setup(cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            per_trial = list(pool.map(lambda t: _trial(setup, t), range(cfg.trials)))
    else:
        per_trial = []
        for t in range(cfg.trials):
            per_trial.append(_trial(setup, t))
            if progress is not None:
                progress(t + 1, cfg.trials)
    data = np.array(per_trial, dtype=float)  # (trials, records, 5)
    records = []
    col = 0
    for gi, (e, snr_ref, beam) in enumerate(setup.points):
        for bits in cfg.adc_bits:
            bits = None if cfg.noise_free else bits
            for meth in cfg.methods:
                d = data[:, col, :]
                col += 1
                mse = d[:, 0]
                valid = mse[~np.isnan(mse)]
                k, n_true = d[:, 1], d[:, 2]
                p = [float(np.mean(k >= np.minimum(j, n_true))) for j in range(1, cfg.L + 1)]
                m, _, _ = _cost(meth, cfg, setup.m_src, setup.o_t, setup.o_r)
                snr_axis = cfg.grid[gi] if cfg.axis == "snr" else (
                    10 * math.log10(snr_ref) - cfg.gain_db if snr_ref > 0 else -math.inf)
                if cfg.noise_free:
                    snr_axis = math.inf
                records.append(MetricsRecord(
                    method=meth, energy_mj=float(e), snr_db=float(snr_axis), adc_bits=bits,
                    n_measurements=int(m),
                    normalized_mse=float(valid.mean()) if valid.size else math.nan,
                    p_detect=p,
                    outage_rate_bps_hz=float(d[:, 3].mean()),
                    perfect_csi_rate_bps_hz=float(d[:, 4].mean()),
                    trials=cfg.trials,
                    median_mse=float(np.median(valid)) if valid.size else math.nan,
                    zero_channel_trials=int(np.isnan(mse).sum()),
                    beam_snr_db=float(beam[meth])))
    return records


def check_invariants(records) -> list[str]:
    problems = []
    for r in records:
        p = r.p_detect
        if any(not 0 <= x <= 1 for x in p):
            problems.append(f"{r.method} @ {r.snr_db}: detection probability outside [0, 1]")
        if any(a < b for a, b in zip(p, p[1:])):
            problems.append(f"{r.method} @ {r.snr_db}: P(k>=j) not nonincreasing in j")
        if r.outage_rate_bps_hz > r.perfect_csi_rate_bps_hz:
            problems.append(f"{r.method} @ {r.snr_db}: outage rate exceeds perfect-CSI rate")
    return problems


# --- output --------------------------------------------------------------------

def _columns(L: int) -> list[str]:
    return (["method", "energy_mj", "snr_db", "adc_bits", "n_measurements", "mse"]
            + [f"p_k{j}" for j in range(1, L + 1)]
            + ["outage", "perfect_csi", "trials", "median_mse", "zero_channels", "beam_snr_db"])


def _fmt(x) -> str:
    if x is None:
        return "inf"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit_results(records, path, fmt: str = "csv", L: int | None = None) -> None:
    """Write records as CSV (stable column order) or JSON."""
    records = list(records)
    if fmt == "json":
        text = json.dumps([asdict(r) for r in records], indent=1) + "\n"
    elif fmt == "csv":
        width = len(records[0].p_detect) if records else (L or 0)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_columns(width))
        for r in records:
            w.writerow([r.method, _fmt(r.energy_mj), _fmt(r.snr_db), _fmt(r.adc_bits),
                        r.n_measurements, _fmt(r.normalized_mse), *map(_fmt, r.p_detect),
                        _fmt(r.outage_rate_bps_hz), _fmt(r.perfect_csi_rate_bps_hz), r.trials,
                        _fmt(r.median_mse), r.zero_channel_trials, _fmt(r.beam_snr_db)])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_results_json(path) -> list[MetricsRecord]:
    with open(path) as fh:
        return [MetricsRecord(**d) for d in json.load(fh)]


def read_results_csv(path) -> list[MetricsRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            p = [float(row[k]) for k in row if k.startswith("p_k")]
            out.append(MetricsRecord(
                method=row["method"], energy_mj=float(row["energy_mj"]), snr_db=float(row["snr_db"]),
                adc_bits=_bits(row["adc_bits"]), n_measurements=int(row["n_measurements"]),
                normalized_mse=float(row["mse"]), p_detect=p,
                outage_rate_bps_hz=float(row["outage"]), perfect_csi_rate_bps_hz=float(row["perfect_csi"]),
                trials=int(row["trials"]), median_mse=float(row["median_mse"]),
                zero_channel_trials=int(row["zero_channels"]), beam_snr_db=float(row["beam_snr_db"])))
    return out


def with_overrides(cfg: ScenarioConfig, **kw) -> ScenarioConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})


# --- decoder training ------------------------------------------------------------

def _point_tag(snr_db: float, bits) -> str:
    b = "inf" if bits is None else str(bits)
    return f"snr{snr_db:+g}_b{b}".replace("+", "p").replace("-", "m").replace(".", "_")


def train_dnn_models(cfg: ScenarioConfig, out_dir, n_s: int = 300, train_cfg=None,
                     sd_points=None, log=None) -> dict:
    """Train per-side MLP decoders for ``cfg`` and write them with a manifest.

    Without ``sd_points`` one noise-free model per non-trivial side is
    trained (files rx.npz / tx.npz).  With a list of (snr_db, bits) pairs a
    DNN-sd model pair is trained at each point on noisy, quantised inputs.
    Training curves are written next to each model as CSV.
    """
    from .mlp import NoiseSpec, TrainConfig, default_architecture, gen_training_data, save_model, train, \
        write_curve_csv

    train_cfg = train_cfg or TrainConfig(seed=cfg.seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sides = [("rx", cfg.rx_code, min(cfg.L, cfg.n_r)), ("tx", cfg.tx_code, min(cfg.L, cfg.n_t))]
    points = [(None, None)] if sd_points is None else [(float(s), _bits(b)) for s, b in sd_points]
    entries = []
    for pi, (snr_db, bits) in enumerate(points):
        entry = {"snr_db": snr_db, "adc_bits": bits}
        for si, (side, spec, L) in enumerate(sides):
            if _is_trivial(spec):
                entry[side] = None
                continue
            G = spec.matrix()
            noise = None if snr_db is None else NoiseSpec(snr_db, bits, cfg.full_scale, cfg.noise)
            rng = np.random.default_rng([train_cfg.seed, pi, si])
            data = gen_training_data(G, L, n_s, cfg.alpha_max, noise, rng)
            arch = default_architecture(*G.shape)
            stem = side if snr_db is None else f"{_point_tag(snr_db, bits)}_{side}"
            if log is not None:
                log(f"training {stem}: {arch}, {len(data.inputs)} samples")
            res = train(data, arch, train_cfg, rng, log=log)
            save_model(res.model, out / f"{stem}.npz")
            write_curve_csv(res.curve, out / f"{stem}_curve.csv")
            entry[side] = f"{stem}.npz"
            entry[f"{side}_best_val_mse"] = res.best_val_mse
        entries.append(entry)
    manifest = {"scenario": cfg.name, "n_s": n_s, "epochs": train_cfg.epochs, "models": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest
