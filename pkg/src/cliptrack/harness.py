"""Experiment orchestration: config parsing, runs, traces and reports."""

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from cliptrack import learners as vl
from cliptrack import verification as vf
from cliptrack.comparator import best_switching_matrix, best_switching_sequence, path_length
from cliptrack.environments import EnvironmentSpec, generate
from cliptrack.errors import ConfigError
from cliptrack.matrix import PCSP
from cliptrack.runner import run_learner
from cliptrack.simplex import HorizonConfig

TRACE_COLUMNS = ("round", "learner", "loss", "comparator_loss", "cum_regret", "min_weight", "epoch", "eta")

# accepted parameter keys per learner id
LEARNER_PARAMS = {
    "mwu": {"eta"},
    "fixed_share": {"eta", "alpha"},
    "projection_update": {"eta", "alpha"},
    "clipped_omd": {"eta"},
    "pcs": {"eta"},
    "ocs": {"eta"},
    "ocs_plus": set(),
    "pcsp": {"eta"},
}
# learners whose tuned rate depends on the loss sequence itself
HINDSIGHT_TUNED = {"pcs", "ocs", "pcsp"}
DEFAULT_ETA = {k: ("oracle" if k in HINDSIGHT_TUNED else "theorem") for k in LEARNER_PARAMS}
CONFIG_KEYS = {"environment", "learners", "S", "output_dir", "verify", "repetitions", "workers", "format"}


@dataclass
class LearnerSpec:
    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in LEARNER_PARAMS:
            raise ConfigError(f"unknown learner id {self.id!r}; known: {sorted(LEARNER_PARAMS)}")
        if not isinstance(self.params, dict):
            raise ConfigError(f"params for {self.id} must be an object")
        extra = set(self.params) - LEARNER_PARAMS[self.id]
        if extra:
            raise ConfigError(f"learner {self.id} does not accept {sorted(extra)}")
        eta = self.params.get("eta")
        if eta is not None and not (eta in ("theorem", "oracle") or
                                    (isinstance(eta, (int, float)) and not isinstance(eta, bool) and eta > 0)):
            raise ConfigError(f"eta for {self.id} must be a positive number, 'theorem' or 'oracle', got {eta!r}")
        alpha = self.params.get("alpha")
        if alpha is not None and (isinstance(alpha, bool) or not isinstance(alpha, (int, float))):
            raise ConfigError(f"alpha for {self.id} must be a number, got {alpha!r}")


@dataclass
class ExperimentConfig:
    environment: EnvironmentSpec
    learners: list
    S: int
    output_dir: str = "cliptrack-out"
    verify: bool = False
    repetitions: int = 1
    workers: int = 1
    format: str = "csv"

    def __post_init__(self):
        if not self.learners:
            raise ConfigError("at least one learner is required")
        if isinstance(self.S, bool) or not isinstance(self.S, int) or not 1 <= self.S <= self.environment.T:
            raise ConfigError(f"S must be an integer in [1, T], got {self.S!r}")
        if isinstance(self.repetitions, bool) or not isinstance(self.repetitions, int) or self.repetitions < 1:
            raise ConfigError(f"repetitions must be a positive integer, got {self.repetitions!r}")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.environment.is_matrix:
            vector = [ls.id for ls in self.learners if ls.id != "pcsp"]
            if vector:
                raise ConfigError(f"vector learners {vector} cannot run on a matrix environment")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(d) - CONFIG_KEYS
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        for key in ("environment", "learners", "S"):
            if key not in d:
                raise ConfigError(f"config is missing {key!r}")
        if not isinstance(d["environment"], dict):
            raise ConfigError("environment must be an object")
        if not isinstance(d["learners"], list):
            raise ConfigError("learners must be a list")
        specs = []
        for item in d["learners"]:
            if isinstance(item, str):
                item = {"id": item}
            if not isinstance(item, dict) or "id" not in item or set(item) - {"id", "params"}:
                raise ConfigError(f"bad learner entry {item!r}")
            specs.append(LearnerSpec(item["id"], item.get("params", {})))
        rest = {k: d[k] for k in ("output_dir", "verify", "repetitions", "workers", "format") if k in d}
        return cls(EnvironmentSpec.from_dict(d["environment"]), specs, d["S"], **rest)


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return ExperimentConfig.from_dict(raw)


@dataclass
class Comparators:
    """Hindsight quantities of one loss sequence, computed once per run."""

    vector: object = None
    matrix: object = None
    P_inf: float = 0.0


def _resolve_eta(spec, T, K, S, comp):
    """Learning rate for a learner plus whether it used hindsight data."""
    eta = spec.params.get("eta", DEFAULT_ETA[spec.id])
    if not isinstance(eta, str):
        return float(eta), False
    if spec.id in ("mwu", "fixed_share", "projection_update", "clipped_omd"):
        return vf.theorem1_eta(T, K, S), False
    if spec.id == "pcs":
        return vf.theorem2_eta(comp.vector.L2, T, K, S), True
    if spec.id == "ocs":
        return vf.theorem3_eta(comp.P_inf, T, K, S), True
    if spec.id == "pcsp":
        return vf.theorem5_eta(comp.matrix.M2, T, K, S), True
    return None, False


def build_learner(spec, T, K, S, comp):
    """Instantiate a learner from its spec; returns (learner, params, hindsight)."""
    if spec.id == "ocs_plus":
        return vl.OCSPlus(T, K, S), {}, False
    eta, hindsight = _resolve_eta(spec, T, K, S, comp)
    params = {"eta": eta}
    try:
        if spec.id == "mwu":
            learner = vl.MWU(K, eta)
        elif spec.id == "fixed_share":
            params["alpha"] = float(spec.params.get("alpha", S / T))
            learner = vl.FixedShare(K, eta, params["alpha"])
        elif spec.id == "projection_update":
            params["alpha"] = float(spec.params.get("alpha", S / (T * K)))
            learner = vl.ProjectionUpdate(K, eta, params["alpha"])
        else:
            cfg = HorizonConfig(T, K, S, eta)
            learner = {"clipped_omd": vl.ClippedOMD, "pcs": vl.PCS, "ocs": vl.OCS, "pcsp": PCSP}[spec.id](cfg)
    except ConfigError as exc:
        raise ConfigError(f"learner {spec.id}: {exc}") from None
    return learner, params, hindsight


def diagonal_losses(losses):
    """Embed a (T, K) loss sequence as diagonal loss matrices."""
    n, k = losses.shape
    out = np.zeros((n, k, k))
    out[:, np.arange(k), np.arange(k)] = losses
    return out


@dataclass
class LearnerRun:
    spec: LearnerSpec
    trajectory: object
    report: object
    comparator_losses: np.ndarray


def _comparator_losses(losses, comp):
    if losses.ndim == 3:
        c = comp.matrix
        v = c.vectors[c.assignment]
        return np.einsum("ti,tij,tj->t", v, losses, v)
    seq = comp.vector.best_sequence
    return losses[np.arange(losses.shape[0]), seq]


@dataclass
class RepetitionResult:
    seed: int
    runs: list


def run_repetition(config, repetition):
    """Generate the environment once and run every learner on it."""
    seed = config.environment.seed + repetition
    losses = generate(config.environment.with_seed(seed))
    # learners sharing a loss view share the comparator through this cache
    cache = {}

    def task(spec):
        return _run_cached(spec, losses, config.S, config.verify, seed, cache)

    if config.workers > 1 and len(config.learners) > 1:
        _warm_cache(config, losses, cache)
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(task, config.learners))
    else:
        runs = [task(spec) for spec in config.learners]
    return RepetitionResult(seed, runs)


def _comparators(losses, S, cache):
    key = losses.ndim
    if key not in cache:
        comp = Comparators()
        if losses.ndim == 3:
            comp.matrix = best_switching_matrix(losses, S)
        else:
            comp.vector = best_switching_sequence(losses, S)
            comp.P_inf = path_length(losses).P_inf
        cache[key] = comp
    return cache[key]


def _warm_cache(config, losses, cache):
    _comparators(losses, config.S, cache)
    if any(ls.id == "pcsp" for ls in config.learners) and losses.ndim == 2:
        _comparators(diagonal_losses(losses), config.S, cache)


def _run_cached(spec, losses, S, verify, seed, cache):
    T, K = losses.shape[0], losses.shape[1]
    if spec.id == "pcsp" and losses.ndim == 2:
        losses = diagonal_losses(losses)
    comp = _comparators(losses, S, cache)
    learner, params, hindsight = build_learner(spec, T, K, S, comp)
    traj = run_learner(learner, losses, params)
    report = vf.check_trajectory(spec.id, losses, S, traj, comp.matrix or comp.vector,
                                 lemmas=verify, hindsight=hindsight, seed=seed)
    return LearnerRun(spec, traj, report, _comparator_losses(losses, comp))


def _fmt(x):
    return repr(float(x))


def trace_rows(run):
    traj = run.trajectory
    cum = 0.0
    for t in range(traj.T):
        cum += float(traj.learner_losses[t]) - float(run.comparator_losses[t])
        yield {
            "round": t + 1,
            "learner": run.spec.id,
            "loss": _fmt(traj.learner_losses[t]),
            "comparator_loss": _fmt(run.comparator_losses[t]),
            "cum_regret": _fmt(cum),
            "min_weight": _fmt(traj.min_weights[t]),
            "epoch": int(traj.epochs[t]),
            "eta": _fmt(traj.etas[t]),
        }


def _header(config, seed):
    env = config.environment
    return (f"# cliptrack trace kind={env.kind} T={env.T} K={env.K} S={config.S} "
            f"seed={seed}")


def render_csv(config, rep):
    buf = io.StringIO()
    buf.write(_header(config, rep.seed) + "\n")
    writer = csv.DictWriter(buf, fieldnames=TRACE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for run in rep.runs:
        writer.writerows(trace_rows(run))
    return buf.getvalue()


def render_json(config, rep):
    body = {
        "header": _header(config, rep.seed)[2:],
        "seed": rep.seed,
        "columns": list(TRACE_COLUMNS),
        "rows": [row for run in rep.runs for row in trace_rows(run)],
    }
    return json.dumps(body, indent=1) + "\n"


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    repetitions: list

    @property
    def reports(self):
        return [run.report for rep in self.repetitions for run in rep.runs]

    @property
    def all_passed(self):
        return all(r.passed for r in self.reports)


def run_experiment(config, write=True):
    reps = [run_repetition(config, r) for r in range(config.repetitions)]
    result = ExperimentResult(config, reps)
    if write:
        write_outputs(result)
    return result


def trace_path(config, rep):
    ext = "csv" if config.format == "csv" else "json"
    return os.path.join(config.output_dir, f"trace-seed{rep.seed}.{ext}")


def write_outputs(result):
    config = result.config
    render = render_csv if config.format == "csv" else render_json
    for rep in result.repetitions:
        write_atomic(trace_path(config, rep), render(config, rep))
    reports = [r.to_dict() for r in result.reports]
    write_atomic(os.path.join(config.output_dir, "reports.json"), json.dumps(reports, indent=1) + "\n")


def summary_table(reports):
    """Plain-text table with columns learner, regret, bound, slack."""
    def num(x):
        return "-" if x is None else f"{x:.4f}"

    rows = [("learner", "regret", "bound", "slack", "theorem", "pass")]
    for r in reports:
        r = r if isinstance(r, dict) else r.to_dict()
        rows.append((r["learner"], num(r["regret"]), num(r["bound"]), num(r["slack"]),
                     r["theorem"], "yes" if r["pass"] else "NO"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)
