"""Metrics and experiment protocols: policy similarity, experience
reduction, and accumulated reward, plus the grid runner that ties them into
one CSV report.

Similarity is measured on traces the TEACHER generates: the teacher drives
the environment, and at every visited state both the executed teacher action
and the student's answer are recorded. This matters because teacher and
student visit different state distributions.

MAE and RMSD are computed over integer action ids, so their magnitude
depends on how action ids happen to be ordered; ACC (exact-match rate) is
the primary similarity figure and the reports flag this.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import condensation
from . import neighbors, trees
from .envs import ENV_NAMES, Environment, make_env
from .errors import ContractError, EmptyError, LengthError
from .experience import ExperiencePool, format_real
from .seeding import derive_seed
from .teachers import Policy, collect, external_teacher, scripted_teacher, train_q_teacher

__all__ = [
    "SimilarityReport",
    "EvaluationReport",
    "RunConfig",
    "similarity_metrics",
    "similarity_eval",
    "teacher_trace",
    "rollout_return",
    "reduction_stats",
    "resolve_teacher",
    "run_experiment_suite",
    "write_csv_report",
    "write_summary",
    "CSV_COLUMNS",
]


@dataclass(frozen=True)
class SimilarityReport:
    mae: float
    rmsd: float
    acc: float
    n_decisions: int


@dataclass(frozen=True)
class EvaluationReport:
    """One experiment cell for one model."""

    env: str
    size: int
    seed: int
    model: str
    similarity: SimilarityReport
    retained_fraction: float  # condensed size / raw collected size
    retained_fraction_dedup: float  # condensed size / deduplicated size
    mean_return_teacher: float
    mean_return_student: float
    episodes: int
    config_echo: str
    error: str | None = None


def similarity_metrics(teacher_actions, student_actions) -> SimilarityReport:
    """MAE, RMSD over action ids, and exact-match accuracy."""
    x = np.asarray(teacher_actions, dtype=np.float64).reshape(-1)
    y = np.asarray(student_actions, dtype=np.float64).reshape(-1)
    if x.shape[0] != y.shape[0]:
        raise LengthError(f"sequence lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise EmptyError("similarity of empty sequences is undefined")
    diff = np.abs(x - y)
    return SimilarityReport(
        mae=float(np.mean(diff)),
        rmsd=float(np.sqrt(np.mean(diff * diff))),
        acc=float(np.mean(x == y)),
        n_decisions=int(x.shape[0]),
    )


def teacher_trace(
    env: Environment, teacher: Policy, episodes: int, seed: int
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """States visited and actions taken while the teacher drives.

    Returns (states, actions, per-episode decision counts).
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    states: list[np.ndarray] = []
    actions: list[int] = []
    lengths: list[int] = []
    for ep in range(episodes):
        s = env.reset(seed=derive_seed(seed, ep))
        done = False
        n0 = len(actions)
        while not done:
            a = teacher.act(s)
            states.append(s.copy())
            actions.append(a)
            tr = env.step(a)
            s, done = tr.next_state, tr.done
        lengths.append(len(actions) - n0)
    return np.array(states), np.array(actions, dtype=np.int64), lengths


def similarity_eval(
    teacher: Policy,
    student: Policy,
    env: Environment,
    episodes: int,
    seed: int = 0,
) -> tuple[SimilarityReport, list[SimilarityReport]]:
    """Teacher drives; metrics pooled over all decisions, plus per episode."""
    states, teach_acts, lengths = teacher_trace(env, teacher, episodes, seed)
    stud_acts = np.array([student.act(s) for s in states], dtype=np.int64)
    pooled = similarity_metrics(teach_acts, stud_acts)
    per_episode = []
    at = 0
    for n in lengths:
        if n > 0:
            per_episode.append(similarity_metrics(teach_acts[at : at + n], stud_acts[at : at + n]))
        at += n
    return pooled, per_episode


def rollout_return(
    policy: Policy, env: Environment, episodes: int, seed: int = 0
) -> tuple[float, list[float]]:
    """Mean summed reward over seeded episodes, plus the per-episode list."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    returns: list[float] = []
    for ep in range(episodes):
        s = env.reset(seed=derive_seed(seed, ep))
        total = 0.0
        done = False
        while not done:
            tr = env.step(policy.act(s))
            total += tr.reward
            s, done = tr.next_state, tr.done
        returns.append(total)
    return float(np.mean(returns)), returns


def reduction_stats(before: ExperiencePool, after: ExperiencePool) -> float:
    """|after| / |before|; after must be a sub-multiset of before."""
    from collections import Counter

    def keyed(pool):
        return Counter(
            (int(pool.actions[i]), pool.states[i].tobytes()) for i in range(len(pool))
        )

    cb, ca = keyed(before), keyed(after)
    for k, cnt in ca.items():
        if cb.get(k, 0) < cnt:
            raise ContractError("after-pool contains points absent from before-pool")
    return len(after) / len(before)


# ---------------------------------------------------------------------------
# Experiment suite
# ---------------------------------------------------------------------------

PROPOSAL_MODELS = {"brute": "brute", "kd": "kdtree", "ball": "balltree"}
BASELINE_MODELS = {
    "dt_entropy_l5": ("entropy", 5),
    "dt_entropy_l10": ("entropy", 10),
    "dt_gini_l5": ("gini", 5),
    "dt_gini_l10": ("gini", 10),
}
MODEL_ORDER = ["teacher", "brute", "kd", "ball"] + list(BASELINE_MODELS)

CSV_COLUMNS = (
    "env",
    "size",
    "model",
    "mae",
    "rmsd",
    "acc",
    "retained_fraction",
    "mean_return",
    "seed",
)


@dataclass
class RunConfig:
    envs: list[str] = field(default_factory=lambda: list(ENV_NAMES))
    sizes: list[int] = field(default_factory=lambda: [500, 1000, 3000, 5000, 10000])
    teacher: str = "scripted"
    backends: list[str] = field(default_factory=lambda: ["brute", "kd", "ball"])
    baselines: list[str] = field(default_factory=lambda: list(BASELINE_MODELS))
    seeds: list[int] = field(default_factory=lambda: [0])
    episodes: int = 200
    outdir: str = "out"

    def echo(self) -> str:
        return (
            f"envs={','.join(self.envs)};sizes={','.join(map(str, self.sizes))};"
            f"teacher={self.teacher};backends={','.join(self.backends)};"
            f"baselines={','.join(self.baselines)};"
            f"seeds={','.join(map(str, self.seeds))};episodes={self.episodes}"
        )


def resolve_teacher(spec: str, env_name: str, seed: int) -> Policy:
    if spec == "scripted":
        return scripted_teacher(env_name)
    if spec.startswith("qlearn"):
        params = {}
        if ":" in spec:
            for part in spec.split(":", 1)[1].split(","):
                k, _, v = part.partition("=")
                params[k.strip()] = v.strip()
        env = make_env(env_name)
        policy, _ = train_q_teacher(
            env,
            episodes=int(params.get("episodes", 5000)),
            alpha=float(params.get("alpha", 0.1)),
            gamma=float(params.get("gamma", 0.99)),
            eps_start=float(params.get("eps_start", 1.0)),
            eps_end=float(params.get("eps_end", 0.05)),
            seed=derive_seed(seed, 3),
        )
        return policy
    if spec.startswith("external:"):
        return external_teacher(spec.split(":", 1)[1])
    raise ValueError(f"unknown teacher spec {spec!r}")


def _run_cell(config: RunConfig, env_name: str, size: int, seed: int) -> list[EvaluationReport]:
    env_id = ENV_NAMES.index(env_name)
    echo = config.echo()
    teacher = resolve_teacher(config.teacher, env_name, seed)
    try:
        env = make_env(env_name)
        pool, stats = collect(env, teacher, size, seed=derive_seed(seed, env_id, size, 0))
        condensed, _ = condensation.condense(pool)
        frac_raw = len(condensed) / stats.raw_count
        frac_dedup = len(condensed) / stats.deduped_count

        students: list[tuple[str, Policy]] = []
        for short in config.backends:
            model = neighbors.fit(condensed, PROPOSAL_MODELS[short])
            students.append((short, model))
        for name in config.baselines:
            criterion, depth = BASELINE_MODELS[name]
            students.append((name, trees.fit_tree(pool, criterion, depth)))

        eval_env = make_env(env_name)
        states, teach_acts, lengths = teacher_trace(
            eval_env, teacher, config.episodes, derive_seed(seed, env_id, size, 1)
        )
        ret_seed = derive_seed(seed, env_id, size, 2)
        teacher_ret, _ = rollout_return(teacher, make_env(env_name), config.episodes, ret_seed)

        reports = [
            EvaluationReport(
                env=env_name,
                size=size,
                seed=seed,
                model="teacher",
                similarity=SimilarityReport(0.0, 0.0, 1.0, int(teach_acts.shape[0])),
                retained_fraction=1.0,
                retained_fraction_dedup=1.0,
                mean_return_teacher=teacher_ret,
                mean_return_student=teacher_ret,
                episodes=config.episodes,
                config_echo=echo,
            )
        ]
        for name, student in students:
            if isinstance(student, neighbors.NearestBoundaryModel):
                stud_acts = student.predict_batch(states)[0]
            else:
                stud_acts = np.array([student.act(s) for s in states], dtype=np.int64)
            sim = similarity_metrics(teach_acts, stud_acts)
            ret, _ = rollout_return(student, make_env(env_name), config.episodes, ret_seed)
            is_proposal = name in PROPOSAL_MODELS
            reports.append(
                EvaluationReport(
                    env=env_name,
                    size=size,
                    seed=seed,
                    model=name,
                    similarity=sim,
                    retained_fraction=frac_raw if is_proposal else 1.0,
                    retained_fraction_dedup=frac_dedup if is_proposal else 1.0,
                    mean_return_teacher=teacher_ret,
                    mean_return_student=ret,
                    episodes=config.episodes,
                    config_echo=echo,
                )
            )
        return reports
    finally:
        close = getattr(teacher, "close", None)
        if close is not None:
            close()


def run_experiment_suite(config: RunConfig) -> list[EvaluationReport]:
    """Collect, condense, fit, and score every (env, size, seed) cell.

    A failing cell is recorded as a single error report; other cells proceed.
    Output order is sorted by cell key, so reports are deterministic no
    matter how cells were scheduled.
    """
    reports: list[EvaluationReport] = []
    for env_name in config.envs:
        for size in config.sizes:
            for seed in config.seeds:
                try:
                    reports.extend(_run_cell(config, env_name, size, seed))
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    reports.append(
                        EvaluationReport(
                            env=env_name,
                            size=size,
                            seed=seed,
                            model="error",
                            similarity=SimilarityReport(0.0, 0.0, 0.0, 0),
                            retained_fraction=0.0,
                            retained_fraction_dedup=0.0,
                            mean_return_teacher=0.0,
                            mean_return_student=0.0,
                            episodes=config.episodes,
                            config_echo=config.echo(),
                            error=f"{type(exc).__name__}: {exc}",
                        )
                    )

    def key(r: EvaluationReport):
        model_rank = (
            MODEL_ORDER.index(r.model) if r.model in MODEL_ORDER else len(MODEL_ORDER)
        )
        return (r.env, r.size, r.seed, model_rank)

    reports.sort(key=key)
    return reports


def write_csv_report(reports: list[EvaluationReport], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in reports:
            if r.error is not None:
                continue
            fh.write(
                ",".join(
                    [
                        r.env,
                        str(r.size),
                        r.model,
                        format_real(r.similarity.mae),
                        format_real(r.similarity.rmsd),
                        format_real(r.similarity.acc),
                        format_real(r.retained_fraction),
                        format_real(r.mean_return_student),
                        str(r.seed),
                    ]
                )
                + "\n"
            )


def write_summary(reports: list[EvaluationReport], path) -> None:
    lines = ["# experiment summary"]
    if reports:
        lines.append(f"# config: {reports[0].config_echo}")
    lines.append(
        "# note: mae/rmsd are over integer action ids and depend on id ordering;"
        " acc is the primary similarity figure"
    )
    for r in reports:
        if r.error is not None:
            lines.append(f"ERROR env={r.env} size={r.size} seed={r.seed}: {r.error}")
            continue
        lines.append(
            f"env={r.env} size={r.size} seed={r.seed} model={r.model} "
            f"acc={r.similarity.acc:.4f} mae={r.similarity.mae:.4f} "
            f"rmsd={r.similarity.rmsd:.4f} retained_raw={r.retained_fraction:.4f} "
            f"retained_dedup={r.retained_fraction_dedup:.4f} "
            f"return={r.mean_return_student:.3f} teacher_return={r.mean_return_teacher:.3f}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
