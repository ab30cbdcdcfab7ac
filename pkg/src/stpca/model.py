"""End-to-end fitting pipeline, run configuration and model serialization."""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .embedding import pairwise_torus_distances
from .errors import InvalidArgumentError, NumericalFailureError
from .geometry import wrap
from .io import write_table
from .pns import FIT_MAX_ROUNDS, FIT_REL_TOL, PnsModel, Subsphere, fit_pns, nested_projections
from .radius import RadiusSelectionConfig, select_radius
from .smds import DEFAULT_TOLERANCE, SmdsConfig, SmdsSolution, initial_configuration, solve_smds
from .torus_map import (
    PairedConfiguration,
    PrincipalCurve,
    TorusVarianceTable,
    principal_curve,
    torus_variance,
)

log = logging.getLogger(__name__)

SCHEMA = 1


@dataclass
class RadiusOptions:
    mode: str = "auto"
    value: float | None = None
    M: int = 100
    n_mc: int = 100
    bracket: tuple | None = None
    tolerance: float = 1e-3


@dataclass
class SmdsOptions:
    tolerance: float = DEFAULT_TOLERANCE
    max_evals: int | None = None
    joint_radius: bool = True


@dataclass
class PnsOptions:
    rel_tol: float = FIT_REL_TOL
    max_rounds: int = FIT_MAX_ROUNDS


@dataclass
class CurveOptions:
    m: int = 100
    restarts: int = 3


@dataclass
class IoOptions:
    input: str | None = None
    output_dir: str | None = None
    delimiter: str = ","
    header: bool = False
    angle_unit: str = "radians"
    lag: int = 0


@dataclass
class RunConfig:
    seed: int = 0
    radius: RadiusOptions = field(default_factory=RadiusOptions)
    smds: SmdsOptions = field(default_factory=SmdsOptions)
    pns: PnsOptions = field(default_factory=PnsOptions)
    curve: CurveOptions = field(default_factory=CurveOptions)
    io: IoOptions = field(default_factory=IoOptions)

    def validate(self):
        r = self.radius
        if r.mode not in ("auto", "fixed"):
            raise InvalidArgumentError("radius mode must be 'auto' or 'fixed'")
        if r.mode == "fixed" and not (r.value is not None and r.value > 0):
            raise InvalidArgumentError("fixed radius mode needs a positive radius value")
        for name, tol in [
            ("radius tolerance", r.tolerance),
            ("smds tolerance", self.smds.tolerance),
            ("pns tolerance", self.pns.rel_tol),
        ]:
            if not tol > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.curve.m < 2:
            raise InvalidArgumentError("curve grid needs m >= 2")
        if self.curve.restarts < 0:
            raise InvalidArgumentError("restarts must be nonnegative")
        return self

    def to_dict(self):
        out = asdict(self)
        out["radius"]["bracket"] = list(self.radius.bracket) if self.radius.bracket else None
        return out

    @classmethod
    def from_dict(cls, data):
        r = dict(data.get("radius", {}))
        if r.get("bracket") is not None:
            r["bracket"] = tuple(r["bracket"])
        return cls(
            seed=data.get("seed", 0),
            radius=RadiusOptions(**r),
            smds=SmdsOptions(**data.get("smds", {})),
            pns=PnsOptions(**data.get("pns", {})),
            curve=CurveOptions(**data.get("curve", {})),
            io=IoOptions(**data.get("io", {})),
        )


@dataclass
class TorusModel:
    config: RunConfig
    data: np.ndarray
    r_star: float
    radius_objective: float | None
    smds: SmdsSolution
    pns: PnsModel
    curve: PrincipalCurve
    variance: TorusVarianceTable

    @property
    def d(self):
        return self.data.shape[1]

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def r_hat(self):
        return self.smds.fitted_radius

    @property
    def scores(self):
        return self.pns.scores

    @property
    def mean_prediction(self):
        """Torus image of the backwards mean."""
        return self.variance.projections[0][0]

    def paired(self):
        return PairedConfiguration(self.data, self.smds.configuration, self.smds.fitted_radius)


def _staged(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except NumericalFailureError as exc:
        if exc.stage is None:
            exc.stage = stage
            exc.args = (f"[{stage}] {exc.args[0]}",) + exc.args[1:]
        raise


def fit(data, config=None):
    """Run the full pipeline on an ``(n, d)`` array of angles.

    Radius selection (unless fixed), classical-MDS start, spherical MDS,
    principal nested spheres, the principal curve and the torus variance
    table, in that order.
    """
    config = (config or RunConfig()).validate()
    X = wrap(np.asarray(data, dtype=np.float64))
    if X.ndim != 2:
        raise InvalidArgumentError("data must be an (n, d) array of angles")
    n, d = X.shape
    if n < d + 2:
        raise InvalidArgumentError(f"need at least d + 2 = {d + 2} observations, got {n}")

    ro = config.radius
    if ro.mode == "fixed":
        r0, r_obj = float(ro.value), None
    else:
        est = _staged(
            "radius",
            select_radius,
            RadiusSelectionConfig(d=d, n=ro.n_mc, M=ro.M, seed=config.seed, search_interval=ro.bracket, tolerance=ro.tolerance),
        )
        r0, r_obj = est.r_star, est.objective_value
    log.info("fit: n=%d d=%d initial radius %.6f", n, d, r0)

    rng = np.random.default_rng(config.seed)
    D = pairwise_torus_distances(X)
    init = _staged("smds", initial_configuration, D, d, r0, rng=rng)
    so = config.smds
    sol = _staged(
        "smds",
        solve_smds,
        D,
        d,
        r0,
        init=init,
        config=SmdsConfig(tolerance=so.tolerance, max_evals=so.max_evals, joint_radius=so.joint_radius),
    )
    pns = _staged("pns", fit_pns, sol.configuration / sol.fitted_radius, config.pns.rel_tol, config.pns.max_rounds)
    paired = PairedConfiguration(X, sol.configuration, sol.fitted_radius)
    curve = _staged("curve", principal_curve, pns, paired, m=config.curve.m, restarts=config.curve.restarts)
    var = _staged("variance", torus_variance, pns, paired, restarts=config.curve.restarts)
    return TorusModel(config, X, float(r0), r_obj, sol, pns, curve, var)


# -- serialization -------------------------------------------------------


def _arr(a):
    return np.asarray(a).tolist()


def model_to_dict(model):
    sol, pns, curve, var = model.smds, model.pns, model.curve, model.variance
    return {
        "schema": SCHEMA,
        "d": model.d,
        "n": model.n,
        "seed": model.config.seed,
        "config": model.config.to_dict(),
        "data": _arr(model.data),
        "radius": {"r_star": model.r_star, "objective": model.radius_objective},
        "smds": {
            "r_hat": sol.fitted_radius,
            "stress": sol.stress,
            "initial_radius": sol.initial_radius,
            "initial_stress": sol.initial_stress,
            "iterations": sol.iterations,
            "evaluations": sol.evaluations,
            "converged": sol.converged,
            "message": sol.message,
            "configuration": _arr(sol.configuration),
        },
        "pns": {
            "subspheres": [
                {
                    "level": s.level,
                    "center": _arr(s.center),
                    "geodesic_radius": s.geodesic_radius,
                    "rotation": _arr(s.rotation),
                }
                for s in pns.subspheres
            ],
            "circle_mean": pns.circle_mean,
            "backwards_mean": _arr(pns.backwards_mean),
            "scores": _arr(pns.scores),
            "sphere_variances": _arr(pns.sphere_variances),
            "sphere_proportions": _arr(pns.proportions),
        },
        "curve": {
            "grid": _arr(curve.grid),
            "samples": _arr(curve.samples),
            "objectives": _arr(curve.objectives),
            "warm_start_used": _arr(curve.warm_start_used),
            "closed": curve.closed,
            "discontinuities": list(curve.discontinuities),
        },
        "torus_variance": {
            "variances": _arr(var.variances),
            "proportions": _arr(var.proportions),
            "degenerate": var.degenerate,
            "mean_prediction": _arr(var.projections[0][0]),
        },
    }


def model_from_dict(data):
    if data.get("schema") != SCHEMA:
        raise InvalidArgumentError(f"unsupported model schema {data.get('schema')!r}; expected {SCHEMA}")
    try:
        config = RunConfig.from_dict(data["config"])
        X = np.array(data["data"], dtype=np.float64).reshape(data["n"], data["d"])
        s = data["smds"]
        sol = SmdsSolution(
            configuration=np.array(s["configuration"], dtype=np.float64),
            fitted_radius=s["r_hat"],
            stress=s["stress"],
            iterations=s["iterations"],
            evaluations=s["evaluations"],
            converged=s["converged"],
            initial_radius=s["initial_radius"],
            initial_stress=s["initial_stress"],
            message=s["message"],
        )
        p = data["pns"]
        subs = [
            Subsphere(
                np.array(q["center"], dtype=np.float64),
                q["geodesic_radius"],
                q["level"],
                np.array(q["rotation"], dtype=np.float64),
            )
            for q in p["subspheres"]
        ]
        pns = PnsModel(
            subspheres=subs,
            circle_mean=p["circle_mean"],
            backwards_mean=np.array(p["backwards_mean"], dtype=np.float64),
            scores=np.array(p["scores"], dtype=np.float64).reshape(data["n"], data["d"]),
            sphere_variances=np.array(p["sphere_variances"], dtype=np.float64),
        )
        c = data["curve"]
        curve = PrincipalCurve(
            samples=np.array(c["samples"], dtype=np.float64),
            grid=np.array(c["grid"], dtype=np.float64),
            objectives=np.array(c["objectives"], dtype=np.float64),
            warm_start_used=np.array(c["warm_start_used"], dtype=bool),
            closed=c["closed"],
            discontinuities=list(c["discontinuities"]),
        )
        t = data["torus_variance"]
        mean_x = np.array(t["mean_prediction"], dtype=np.float64)
        var = TorusVarianceTable(
            variances=np.array(t["variances"], dtype=np.float64),
            proportions=np.array(t["proportions"], dtype=np.float64),
            projections=[np.tile(mean_x, (X.shape[0], 1))],
            degenerate=t["degenerate"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed model file: {exc}") from exc
    r = data["radius"]
    return TorusModel(config, X, r["r_star"], r["objective"], sol, pns, curve, var)


def dumps(model):
    return json.dumps(model_to_dict(model), indent=1, sort_keys=True) + "\n"


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(data)


def save_model(model, path):
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read model {path}: {exc.strerror or exc}") from exc
    return loads(text)


def restore_projections(model):
    """Recompute the per-level sphere projections dropped from the saved file."""
    if model.pns.projections is None:
        model.pns.projections = nested_projections(model.pns, model.smds.configuration / model.r_hat)
    return model.pns.projections


# -- artifacts -----------------------------------------------------------


def write_artifacts(model, out_dir):
    """Write model.json, scores.csv, embedding.csv, curve.csv and variance.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = model.d
    save_model(model, out / "model.json")
    write_table(out / "scores.csv", [f"xi_{k + 1}" for k in range(d)], model.scores)
    write_table(out / "embedding.csv", [f"y_{k + 1}" for k in range(d + 1)], model.smds.configuration)
    c = model.curve
    write_table(
        out / "curve.csv",
        ["j", "xi"] + [f"theta_{k + 1}" for k in range(d)] + ["objective", "warm_start_used"],
        (
            [j + 1, c.grid[j], *c.samples[j], c.objectives[j], bool(c.warm_start_used[j])]
            for j in range(len(c.grid))
        ),
    )
    sv = model.pns.sphere_variances
    sp = model.pns.proportions
    v = model.variance
    write_table(
        out / "variance.csv",
        ["component", "sphere_variance", "sphere_proportion", "torus_variance", "torus_proportion"],
        ([k + 1, sv[k], sp[k], v.variances[k], v.proportions[k]] for k in range(d)),
    )
    return out
