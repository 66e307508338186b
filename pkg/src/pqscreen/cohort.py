"""Cohort data model, CSV ingestion, and calibrated synthetic generation.

A cohort is a table of questionnaire observations: each row is one visit
of one subject, carrying the 20 patient-questionnaire severities (each
coded 0 normal, 1 slight, 2 mild, 3 moderate, 4 severe), gender, age, a
binary class label (0 healthy normal, 1 early PD), and optional Hoehn &
Yahr stage and striatal-binding-ratio columns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

PQ_ITEM_NAMES: tuple[str, ...] = (
    "P1_SLPN",
    "P1_SLPD",
    "P1_PAIN",
    "P1_URIN",
    "P1_CNST",
    "P1_LTHD",
    "P1_FATG",
    "P2_SPCH",
    "P2_SALV",
    "P2_SWAL",
    "P2_EAT",
    "P2_DRES",
    "P2_HYGN",
    "P2_HWRT",
    "P2_HOBB",
    "P2_TURN",
    "P2_TRMR",
    "P2_RISE",
    "P2_WALK",
    "P2_FREZ",
)

FEATURE_NAMES: tuple[str, ...] = PQ_ITEM_NAMES + ("GENDER", "AGE")

PQ_ITEM_LABELS: dict[str, str] = {
    "P1_SLPN": "Sleep Problems",
    "P1_SLPD": "Daytime Sleepiness",
    "P1_PAIN": "Pain and other sensations",
    "P1_URIN": "Urinary problems",
    "P1_CNST": "Constipation problems",
    "P1_LTHD": "Light Headedness on standing",
    "P1_FATG": "Fatigue",
    "P2_SPCH": "Speech",
    "P2_SALV": "Saliva and Drooling",
    "P2_SWAL": "Chewing and Swallowing",
    "P2_EAT": "Eating tasks",
    "P2_DRES": "Dressing",
    "P2_HYGN": "Hygiene",
    "P2_HWRT": "Handwriting",
    "P2_HOBB": "Doing Hobbies and other activities",
    "P2_TURN": "Turning in bed",
    "P2_TRMR": "Tremor",
    "P2_RISE": "Getting out of bed/car/deep chair",
    "P2_WALK": "Walking and balance",
    "P2_FREZ": "Freezing",
}

SBR_NAMES: tuple[str, ...] = ("SBR_RC", "SBR_LC", "SBR_RP", "SBR_LP")

LABEL_NORMAL = 0
LABEL_PD = 1

SEVERITY_LEVELS = 5  # severities live on {0, 1, 2, 3, 4}
MAX_SEVERITY = SEVERITY_LEVELS - 1

AGE_MIN, AGE_MAX = 0.0, 130.0
SYNTH_AGE_LOW, SYNTH_AGE_HIGH = 30.0, 100.0

# Slack on the variance feasibility bound, absorbing the two-decimal
# rounding of published summary statistics (e.g. "0±0.05").
_MOMENT_SLACK = 0.01


class CohortError(ValueError):
    """Invalid cohort data or cohort file."""


class InfeasibleMomentsError(CohortError):
    """No distribution on {0..4} can match the requested mean/SD."""


@dataclass(frozen=True)
class FeatureVector:
    """One observation's 22 features: 20 questionnaire severities, age, gender."""

    pq_items: tuple[int, ...]
    age: float
    gender: int

    def __post_init__(self):
        if len(self.pq_items) != len(PQ_ITEM_NAMES):
            raise CohortError(
                f"expected {len(PQ_ITEM_NAMES)} questionnaire items, got {len(self.pq_items)}"
            )
        for name, v in zip(PQ_ITEM_NAMES, self.pq_items):
            if not (isinstance(v, (int, np.integer)) and 0 <= v <= MAX_SEVERITY):
                raise CohortError(f"{name} severity must be an integer in 0..4, got {v!r}")
        if not (AGE_MIN <= self.age <= AGE_MAX):
            raise CohortError(f"age must lie in [{AGE_MIN}, {AGE_MAX}], got {self.age}")
        if self.gender not in (0, 1):
            raise CohortError(f"gender must be 0 or 1, got {self.gender!r}")

    def as_array(self) -> np.ndarray:
        return np.array(list(self.pq_items) + [self.gender, self.age], dtype=float)


@dataclass(frozen=True)
class Observation:
    subject_id: str
    visit_index: int
    features: FeatureVector
    label: int
    hy_stage: float | None = None
    sbr: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.label not in (LABEL_NORMAL, LABEL_PD):
            raise CohortError(f"label must be 0 or 1, got {self.label!r}")
        if self.visit_index < 0:
            raise CohortError("visit_index must be non-negative")


class Cohort:
    """Immutable table of observations with the canonical 22-feature layout.

    Attributes
    ----------
    subject_ids : (n,) array of str
    visits : (n,) int array
    X : (n, 22) float array, columns ordered as FEATURE_NAMES
    y : (n,) int array of class labels (0 normal, 1 early PD)
    hy : (n,) float array or None; NaN marks a missing stage
    sbr : (n, 4) float array or None; NaN marks missing values
    """

    def __init__(self, subject_ids, visits, X, y, hy=None, sbr=None):
        self.subject_ids = np.asarray(subject_ids)
        self.visits = np.asarray(visits, dtype=int)
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=int)
        self.hy = None if hy is None else np.asarray(hy, dtype=float)
        self.sbr = None if sbr is None else np.asarray(sbr, dtype=float)
        self.feature_names = FEATURE_NAMES
        self._validate()
        for a in (self.subject_ids, self.visits, self.X, self.y, self.hy, self.sbr):
            if a is not None:
                a.setflags(write=False)

    def _validate(self):
        n = len(self.subject_ids)
        if n == 0:
            raise CohortError("cohort is empty")
        if not (len(self.visits) == len(self.y) == self.X.shape[0] == n):
            raise CohortError("cohort column lengths disagree")
        if self.X.shape[1] != len(FEATURE_NAMES):
            raise CohortError(f"expected {len(FEATURE_NAMES)} feature columns, got {self.X.shape[1]}")
        pq = self.X[:, : len(PQ_ITEM_NAMES)]
        if not np.all((pq >= 0) & (pq <= MAX_SEVERITY) & (pq == np.round(pq))):
            raise CohortError("questionnaire severities must be integers in 0..4")
        gender = self.X[:, FEATURE_NAMES.index("GENDER")]
        if not np.all((gender == 0) | (gender == 1)):
            raise CohortError("gender must be coded 0 or 1")
        age = self.X[:, FEATURE_NAMES.index("AGE")]
        if not np.all((age >= AGE_MIN) & (age <= AGE_MAX)):
            raise CohortError(f"age must lie in [{AGE_MIN}, {AGE_MAX}]")
        if not np.all(np.isin(self.y, (LABEL_NORMAL, LABEL_PD))):
            raise CohortError("labels must be 0 or 1")
        keys = set()
        for sid, v in zip(self.subject_ids, self.visits):
            key = (str(sid), int(v))
            if key in keys:
                raise CohortError(f"duplicate (subject, visit) pair {key}")
            keys.add(key)
        for sid in np.unique(self.subject_ids):
            labels = np.unique(self.y[self.subject_ids == sid])
            if len(labels) > 1:
                raise CohortError(f"subject {sid} carries conflicting class labels")

    @classmethod
    def from_observations(cls, observations: Iterable[Observation]) -> "Cohort":
        obs = list(observations)
        if not obs:
            raise CohortError("cohort is empty")
        X = np.stack([o.features.as_array() for o in obs])
        hy = None
        if any(o.hy_stage is not None for o in obs):
            hy = np.array([math.nan if o.hy_stage is None else o.hy_stage for o in obs])
        sbr = None
        if any(o.sbr is not None for o in obs):
            sbr = np.array([(math.nan,) * 4 if o.sbr is None else o.sbr for o in obs])
        return cls(
            subject_ids=np.array([o.subject_id for o in obs]),
            visits=np.array([o.visit_index for o in obs]),
            X=X,
            y=np.array([o.label for o in obs]),
            hy=hy,
            sbr=sbr,
        )

    def __len__(self) -> int:
        return len(self.y)

    def class_counts(self) -> tuple[int, int]:
        return int(np.sum(self.y == LABEL_NORMAL)), int(np.sum(self.y == LABEL_PD))

    def subset(self, indices) -> "Cohort":
        idx = np.asarray(indices, dtype=int)
        return Cohort(
            subject_ids=self.subject_ids[idx],
            visits=self.visits[idx],
            X=self.X[idx],
            y=self.y[idx],
            hy=None if self.hy is None else self.hy[idx],
            sbr=None if self.sbr is None else self.sbr[idx],
        )

    def pq_matrix(self) -> np.ndarray:
        return self.X[:, : len(PQ_ITEM_NAMES)]

    def equals(self, other: "Cohort") -> bool:
        def _eq(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b, equal_nan=True)

        return (
            np.array_equal(self.subject_ids.astype(str), other.subject_ids.astype(str))
            and np.array_equal(self.visits, other.visits)
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
            and _eq(self.hy, other.hy)
            and _eq(self.sbr, other.sbr)
        )


@dataclass(frozen=True)
class GroupMoments:
    """Per-class, per-feature mean and standard deviation in canonical order."""

    normal_mean: np.ndarray
    normal_sd: np.ndarray
    pd_mean: np.ndarray
    pd_sd: np.ndarray

    def __post_init__(self):
        for name in ("normal_mean", "normal_sd", "pd_mean", "pd_sd"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (len(FEATURE_NAMES),):
                raise CohortError(f"{name} must have {len(FEATURE_NAMES)} entries")
            object.__setattr__(self, name, arr)
        if np.any(self.normal_sd < 0) or np.any(self.pd_sd < 0):
            raise CohortError("standard deviations must be non-negative")
        npq = len(PQ_ITEM_NAMES)
        for cls_mean in (self.normal_mean[:npq], self.pd_mean[:npq]):
            if np.any(cls_mean < 0) or np.any(cls_mean > MAX_SEVERITY):
                raise CohortError("questionnaire item means must lie in [0, 4]")

    def for_class(self, label: int) -> tuple[np.ndarray, np.ndarray]:
        if label == LABEL_NORMAL:
            return self.normal_mean, self.normal_sd
        return self.pd_mean, self.pd_sd

    @classmethod
    def from_table(cls, table: Mapping[str, tuple[float, float, float, float]]) -> "GroupMoments":
        """Build from {feature: (normal_mean, normal_sd, pd_mean, pd_sd)}."""
        missing = [f for f in FEATURE_NAMES if f not in table]
        if missing:
            raise CohortError(f"moments missing for features: {missing}")
        rows = [table[f] for f in FEATURE_NAMES]
        arr = np.array(rows, dtype=float)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])


# Group summary statistics (mean, SD per class) of the early-PD screening
# questionnaire cohort; default calibration targets for synthesize_cohort.
# Tuple layout: (normal mean, normal SD, PD mean, PD SD).
REFERENCE_MOMENTS = GroupMoments.from_table(
    {
        "P1_SLPN": (0.77, 0.97, 1.03, 1.09),
        "P1_SLPD": (0.57, 0.75, 0.95, 0.86),
        "P1_PAIN": (0.49, 0.75, 0.80, 0.88),
        "P1_URIN": (0.33, 0.63, 0.75, 0.86),
        "P1_CNST": (0.13, 0.40, 0.55, 0.73),
        "P1_LTHD": (0.11, 0.34, 0.39, 0.67),
        "P1_FATG": (0.35, 0.60, 0.77, 0.85),
        "P2_SPCH": (0.03, 0.21, 0.61, 0.82),
        "P2_SALV": (0.09, 0.39, 0.73, 1.03),
        "P2_SWAL": (0.02, 0.16, 0.22, 0.49),
        "P2_EAT": (0.01, 0.08, 0.48, 0.63),
        "P2_DRES": (0.02, 0.17, 0.59, 0.66),
        "P2_HYGN": (0.00, 0.05, 0.35, 0.50),
        "P2_HWRT": (0.08, 0.34, 1.05, 0.96),
        "P2_HOBB": (0.03, 0.23, 0.62, 0.76),
        "P2_TURN": (0.04, 0.19, 0.41, 0.55),
        "P2_TRMR": (0.06, 0.23, 1.17, 0.74),
        "P2_RISE": (0.08, 0.27, 0.59, 0.68),
        "P2_WALK": (0.07, 0.33, 0.52, 0.61),
        "P2_FREZ": (0.00, 0.05, 0.09, 0.34),
        "GENDER": (0.62, 0.49, 0.66, 0.47),
        "AGE": (66.42, 11.09, 66.61, 9.69),
    }
)

# Average follow-up visits per subject in the reference cohort.
REFERENCE_VISITS_NORMAL = 5.06
REFERENCE_VISITS_PD = 9.92


# ---------------------------------------------------------------------------
# CSV input/output
# ---------------------------------------------------------------------------

_REQUIRED_COLUMNS = ("SUBJECT_ID", "VISIT", "LABEL") + FEATURE_NAMES
_OPTIONAL_COLUMNS = ("HY",) + SBR_NAMES


def _parse_severity(raw: str, row: int, column: str) -> int:
    try:
        v = float(raw)
    except ValueError:
        raise CohortError(f"row {row}, column {column}: {raw!r} is not a number") from None
    if v != int(v) or not (0 <= v <= MAX_SEVERITY):
        raise CohortError(
            f"row {row}, column {column}: severity {raw!r} outside the integer range 0..4"
        )
    return int(v)


def load_cohort(path, schema: Mapping[str, str] | None = None) -> Cohort:
    """Read a cohort CSV.

    ``schema`` optionally maps canonical column names to the names used in
    the file. Rows violating the feature invariants abort the load with an
    error naming the offending data row (1-based, excluding the header) and
    column.
    """
    rename = dict(schema or {})

    def col(name: str) -> str:
        return rename.get(name, name)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CohortError(f"{path}: empty file")
        present = set(reader.fieldnames)
        missing = [c for c in _REQUIRED_COLUMNS if col(c) not in present]
        if missing:
            raise CohortError(f"{path}: missing required columns {missing}")
        has_hy = col("HY") in present
        has_sbr = all(col(c) in present for c in SBR_NAMES)

        subject_ids, visits, rows, labels, hy, sbr = [], [], [], [], [], []
        for i, rec in enumerate(reader, start=1):
            sid = rec[col("SUBJECT_ID")].strip()
            if not sid:
                raise CohortError(f"row {i}: empty SUBJECT_ID")
            try:
                visit = int(float(rec[col("VISIT")]))
                label = int(float(rec[col("LABEL")]))
            except ValueError:
                raise CohortError(f"row {i}: VISIT and LABEL must be integers") from None
            if label not in (LABEL_NORMAL, LABEL_PD):
                raise CohortError(f"row {i}, column LABEL: must be 0 or 1, got {label}")
            pq = [_parse_severity(rec[col(c)], i, c) for c in PQ_ITEM_NAMES]
            gender = _parse_float(rec[col("GENDER")], i, "GENDER")
            if gender not in (0.0, 1.0):
                raise CohortError(f"row {i}, column GENDER: must be 0 or 1")
            age = _parse_float(rec[col("AGE")], i, "AGE")
            if not (AGE_MIN <= age <= AGE_MAX):
                raise CohortError(f"row {i}, column AGE: {age} outside [{AGE_MIN}, {AGE_MAX}]")
            subject_ids.append(sid)
            visits.append(visit)
            labels.append(label)
            rows.append(pq + [gender, age])
            if has_hy:
                hy.append(_parse_optional(rec[col("HY")], i, "HY"))
            if has_sbr:
                sbr.append([_parse_optional(rec[col(c)], i, c) for c in SBR_NAMES])

    if not rows:
        raise CohortError(f"{path}: no data rows")
    return Cohort(
        subject_ids=np.array(subject_ids),
        visits=np.array(visits),
        X=np.array(rows, dtype=float),
        y=np.array(labels),
        hy=np.array(hy) if has_hy else None,
        sbr=np.array(sbr) if has_sbr else None,
    )


def _parse_float(raw: str, row: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise CohortError(f"row {row}, column {column}: {raw!r} is not a number") from None


def _parse_optional(raw: str, row: int, column: str) -> float:
    raw = raw.strip()
    if raw == "" or raw.upper() in ("NA", "NAN"):
        return math.nan
    return _parse_float(raw, row, column)


def write_cohort(cohort: Cohort, path) -> None:
    """Write a cohort CSV with the canonical header; round-trips exactly."""
    header = list(_REQUIRED_COLUMNS)
    if cohort.hy is not None:
        header.append("HY")
    if cohort.sbr is not None:
        header.extend(SBR_NAMES)

    def fmt(v: float) -> str:
        if math.isnan(v):
            return ""
        if v == int(v):
            return str(int(v))
        return repr(float(v))

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        npq = len(PQ_ITEM_NAMES)
        for i in range(len(cohort)):
            row = [str(cohort.subject_ids[i]), int(cohort.visits[i]), int(cohort.y[i])]
            row += [int(v) for v in cohort.X[i, :npq]]
            row += [int(cohort.X[i, npq]), fmt(cohort.X[i, npq + 1])]
            if cohort.hy is not None:
                row.append(fmt(cohort.hy[i]))
            if cohort.sbr is not None:
                row.extend(fmt(v) for v in cohort.sbr[i])
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Synthetic cohort generation
# ---------------------------------------------------------------------------

def severity_pmf(mean: float, sd: float, feature: str = "") -> np.ndarray:
    """Distribution on {0..4} moment-matched to (mean, sd).

    Families, in order: binomial on 4 trials when the target is at or below
    binomial dispersion, beta-binomial for intermediate overdispersion, and
    a two-point {0, s} distribution when the target variance reaches the
    beta-binomial limit. Raises InfeasibleMomentsError when no distribution
    on {0..4} can have the requested moments (variance above mean*(4-mean),
    beyond rounding slack).
    """
    tag = f" for feature {feature}" if feature else ""
    if not (0.0 <= mean <= MAX_SEVERITY):
        raise InfeasibleMomentsError(f"severity mean {mean} outside [0, 4]{tag}")
    if sd < 0:
        raise InfeasibleMomentsError(f"negative SD {sd}{tag}")
    var = sd * sd
    vmax = mean * (MAX_SEVERITY - mean)
    if var > vmax + _MOMENT_SLACK:
        raise InfeasibleMomentsError(
            f"SD {sd} impossible for any distribution on 0..4 with mean {mean}{tag}"
        )
    if sd == 0.0:
        if mean != round(mean):
            raise InfeasibleMomentsError(f"zero SD requires an integer mean, got {mean}{tag}")
        pmf = np.zeros(SEVERITY_LEVELS)
        pmf[int(round(mean))] = 1.0
        return pmf

    var = min(var, vmax)
    p = mean / MAX_SEVERITY
    v_bin = vmax / MAX_SEVERITY  # variance of Binomial(4, p)
    k = np.arange(SEVERITY_LEVELS)
    if v_bin <= 0.0 or var <= v_bin:
        comb = np.array([math.comb(MAX_SEVERITY, int(i)) for i in k], dtype=float)
        pmf = comb * p**k * (1 - p) ** (MAX_SEVERITY - k)
        return pmf / pmf.sum()

    rho = (var / v_bin - 1.0) / (MAX_SEVERITY - 1)
    if rho >= 1.0 - 1e-9:
        # Overdispersion at or past the beta-binomial limit: two-point {0, s}
        # with the smallest upper level whose variance reaches the target.
        for s in range(1, SEVERITY_LEVELS):
            if s >= mean and mean * (s - mean) >= var - 1e-12:
                break
        q = mean / s
        pmf = np.zeros(SEVERITY_LEVELS)
        pmf[0], pmf[s] = 1.0 - q, q
        return pmf

    ab = 1.0 / rho - 1.0
    a, b = p * ab, (1.0 - p) * ab
    logpmf = [
        math.lgamma(MAX_SEVERITY + 1)
        - math.lgamma(i + 1)
        - math.lgamma(MAX_SEVERITY - i + 1)
        + math.lgamma(i + a)
        + math.lgamma(MAX_SEVERITY - i + b)
        - math.lgamma(MAX_SEVERITY + a + b)
        + math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        for i in range(SEVERITY_LEVELS)
    ]
    pmf = np.exp(logpmf)
    return pmf / pmf.sum()


def _quota_counts(pmf: np.ndarray, n: int) -> np.ndarray:
    """Largest-remainder apportionment of n draws over the pmf bins."""
    raw = pmf * n
    counts = np.floor(raw).astype(int)
    short = n - counts.sum()
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def _draw_column(pmf: np.ndarray, values: np.ndarray, n: int, rng) -> np.ndarray:
    """Column of n draws whose empirical distribution matches pmf up to rounding."""
    counts = _quota_counts(pmf, n)
    col = np.repeat(values, counts)
    rng.shuffle(col)
    return col


def _draw_truncated_normal(mean, sd, low, high, n, rng) -> np.ndarray:
    """Stratified inverse-CDF draws from a normal truncated to [low, high]."""
    from scipy.special import ndtr, ndtri

    if sd <= 0:
        return np.full(n, float(np.clip(mean, low, high)))
    a = ndtr((low - mean) / sd)
    b = ndtr((high - mean) / sd)
    u = a + (b - a) * (np.arange(n) + rng.random(n)) / n
    out = mean + sd * ndtri(u)
    rng.shuffle(out)
    return np.clip(out, low, high)


def synthesize_cohort(
    moments: GroupMoments = REFERENCE_MOMENTS,
    n_normal_subjects: int = 198,
    n_pd_subjects: int = 474,
    visits_normal: float = REFERENCE_VISITS_NORMAL,
    visits_pd: float = REFERENCE_VISITS_PD,
    seed: int = 0,
) -> Cohort:
    """Generate a cohort whose per-class feature moments match the targets.

    Questionnaire severities are drawn from moment-matched distributions on
    {0..4} (see severity_pmf) using exact-proportion quota sampling, so the
    sample marginals track the calibrated distribution up to rounding.
    Gender is quota-sampled Bernoulli; age comes from a stratified truncated
    normal on [30, 100]. Features are redrawn independently per visit, and
    per-subject visit counts follow a shifted Poisson (minimum one visit)
    whose mean matches the requested class average. Deterministic for a
    fixed seed.
    """
    if n_normal_subjects <= 0 or n_pd_subjects <= 0:
        raise CohortError("subject counts must be positive")
    if visits_normal < 1 or visits_pd < 1:
        raise CohortError("mean visit counts must be at least 1")

    rng = np.random.default_rng(seed)
    npq = len(PQ_ITEM_NAMES)
    parts = []
    for label, n_subj, mean_visits, prefix in (
        (LABEL_NORMAL, n_normal_subjects, visits_normal, "HC"),
        (LABEL_PD, n_pd_subjects, visits_pd, "PD"),
    ):
        mean, sd = moments.for_class(label)
        visit_counts = 1 + rng.poisson(mean_visits - 1.0, size=n_subj)
        n_obs = int(visit_counts.sum())

        X = np.empty((n_obs, len(FEATURE_NAMES)))
        sev_values = np.arange(SEVERITY_LEVELS, dtype=float)
        for j in range(npq):
            pmf = severity_pmf(mean[j], sd[j], feature=PQ_ITEM_NAMES[j])
            X[:, j] = _draw_column(pmf, sev_values, n_obs, rng)
        g = FEATURE_NAMES.index("GENDER")
        p_gender = min(max(mean[g], 0.0), 1.0)
        X[:, g] = _draw_column(np.array([1 - p_gender, p_gender]), np.array([0.0, 1.0]), n_obs, rng)
        a = FEATURE_NAMES.index("AGE")
        X[:, a] = _draw_truncated_normal(mean[a], sd[a], SYNTH_AGE_LOW, SYNTH_AGE_HIGH, n_obs, rng)

        width = len(str(n_subj))
        sids = np.repeat(
            np.array([f"{prefix}{i + 1:0{width}d}" for i in range(n_subj)]), visit_counts
        )
        visit_idx = np.concatenate([np.arange(v) for v in visit_counts])
        parts.append((sids, visit_idx, X, np.full(n_obs, label, dtype=int)))

    return Cohort(
        subject_ids=np.concatenate([p[0] for p in parts]),
        visits=np.concatenate([p[1] for p in parts]),
        X=np.vstack([p[2] for p in parts]),
        y=np.concatenate([p[3] for p in parts]),
    )


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

def severity_distribution(cohort: Cohort, label: int) -> dict[str, np.ndarray]:
    """Per questionnaire item, the 5-bin severity histogram of one class."""
    mask = cohort.y == label
    if not mask.any():
        raise CohortError(f"class {label} absent from cohort")
    pq = cohort.pq_matrix()[mask].astype(int)
    return {
        name: np.bincount(pq[:, j], minlength=SEVERITY_LEVELS)
        for j, name in enumerate(PQ_ITEM_NAMES)
    }


def normal_behavior_gap(cohort: Cohort) -> dict[str, float]:
    """Percentage of normal-class observations at severity 0 minus the PD percentage."""
    hist_n = severity_distribution(cohort, LABEL_NORMAL)
    hist_p = severity_distribution(cohort, LABEL_PD)
    n_n = int(np.sum(cohort.y == LABEL_NORMAL))
    n_p = int(np.sum(cohort.y == LABEL_PD))
    return {
        name: 100.0 * hist_n[name][0] / n_n - 100.0 * hist_p[name][0] / n_p
        for name in PQ_ITEM_NAMES
    }


def group_moments_of(cohort: Cohort) -> GroupMoments:
    """Sample per-class moments of a cohort, e.g. for calibration reports."""
    out = []
    for label in (LABEL_NORMAL, LABEL_PD):
        mask = cohort.y == label
        if not mask.any():
            raise CohortError(f"class {label} absent from cohort")
        Xc = cohort.X[mask]
        out.append((Xc.mean(axis=0), Xc.std(axis=0)))
    return GroupMoments(out[0][0], out[0][1], out[1][0], out[1][1])
