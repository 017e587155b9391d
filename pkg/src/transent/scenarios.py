"""Named simulation scenarios and their reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .criteria import (
    MINUS_PLUS,
    PLUS_MINUS,
    Q_MINUS,
    Q_PLUS,
    RHO_MINUS,
    RHO_PLUS,
    DgczReport,
    StateSummary,
    apply_arm_transforms,
    dgcz_sum_source,
    position_correlation,
    rotated_dgcz_closed_form,
    separability_angle,
    violation_possible,
    violation_threshold,
)
from .gaussian import GridSpec, SourceParameters, make_source_state, real_part_schmidt_number
from .measurement import (
    OPPOSITE,
    SAME,
    DetectorConfig,
    ScanConfig,
    expected_histogram,
    fit_gaussian,
    simulate_scan,
    steps_to_cover,
    with_fit,
)
from .optics import (
    DimensionScale,
    LensSystem,
    arm_transform,
    compose_systems,
    frft_chain,
    worst_case_pair,
)

PI = math.pi


@dataclass(frozen=True)
class Configuration:
    """A pair of detection setups: one imaging the position variables and one
    whose detection plane is turned a quarter rotation further, so that its
    position coordinates read the momentum variables."""

    name: str
    angles: tuple
    rho_systems: tuple
    q_systems: tuple


def momentum_plane_angle(alpha: float) -> float:
    """Order whose position variable reads ``q`` at order ``alpha``, up to sign."""
    return alpha - PI / 2 if alpha >= PI / 2 else alpha + PI / 2


def _arm(config: ScenarioConfig, alpha: float, stages=None) -> LensSystem:
    o = config.optics
    return frft_chain(alpha, o.f_prime, k=o.k, stages=stages, imaging_focal=o.imaging_focal)


def angle_configuration(config: ScenarioConfig, name, alpha_s, alpha_i, stages_s=None, stages_i=None):
    return Configuration(
        name=name,
        angles=(alpha_s, alpha_i),
        rho_systems=(_arm(config, alpha_s, stages_s), _arm(config, alpha_i, stages_i)),
        q_systems=(
            _arm(config, momentum_plane_angle(alpha_s)),
            _arm(config, momentum_plane_angle(alpha_i)),
        ),
    )


def scenario_configurations(config: ScenarioConfig) -> list:
    o = config.optics
    name = config.scenario
    if name == "source-check":
        return [angle_configuration(config, "source", PI, PI)]
    if name == "intermediate-null":
        return [angle_configuration(config, "intermediate-null", 3 * PI / 4, 3 * PI / 4)]
    if name == "intermediate-violation":
        stages = o.signal_stages if o.signal_stages is not None else 3
        return [angle_configuration(config, "intermediate-violation", 5 * PI / 4, 3 * PI / 4, stages_s=stages)]
    if name == "perturbation-study":
        stages = o.signal_stages if o.signal_stages is not None else 3
        return [
            angle_configuration(config, "source", PI, PI),
            angle_configuration(config, "intermediate-violation", 5 * PI / 4, 3 * PI / 4, stages_s=stages),
        ]
    if name == "custom":
        if o.signal_system is not None and o.idler_system is not None:
            quarter = frft_chain(PI / 2, o.f_prime, k=o.k)
            systems = (o.signal_system, o.idler_system)
            return [
                Configuration(
                    name="custom",
                    angles=None,
                    rho_systems=systems,
                    q_systems=tuple(compose_systems([s, quarter]) for s in systems),
                )
            ]
        return [
            angle_configuration(
                config, "custom", o.signal_angle, o.idler_angle, o.signal_stages, o.idler_stages
            )
        ]
    return []


def _plane(cov, systems):
    return apply_arm_transforms(cov, arm_transform(systems[0]), arm_transform(systems[1]))


# (label, plane, combination, scan direction, variable)
_CURVES = (
    ("rho-", "rho", RHO_MINUS, OPPOSITE, "rho"),
    ("rho+", "rho", RHO_PLUS, SAME, "rho"),
    ("q+", "q", RHO_PLUS, SAME, "q"),
    ("q-", "q", RHO_MINUS, OPPOSITE, "q"),
)


def _seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1, dtype=np.uint64)[0])


def _detector(config, variance, scale):
    d = config.detector
    n = d.n_steps or steps_to_cover(variance, d.slit_width, d.step, scale)
    return DetectorConfig(d.slit_width, d.step, n, scale)


def analyse_configuration(config: ScenarioConfig, cov, conf: Configuration, seed_offset=0, simulate=True):
    """Analytic, slit-broadened and simulated DGCZ results for one configuration."""
    scale = DimensionScale(config.optics.k, config.optics.f_prime)
    planes = {"rho": _plane(cov, conf.rho_systems), "q": _plane(cov, conf.q_systems)}
    curves = {}
    for index, (label, plane, combo, direction, variable) in enumerate(_CURVES):
        c = planes[plane]
        variance = c.variance(combo)
        det = _detector(config, variance, scale)
        scan = ScanConfig(direction, config.events, _seed(config.seed, seed_offset + index))
        entry = {"analytic": variance, "n_steps": det.n_steps}
        entry["expected"] = fit_gaussian(expected_histogram(c, det, scan, variable, conf.angles)).variance
        entry["naive_broadened"] = variance + det.slit_broadening()
        if simulate:
            entry["histogram"] = with_fit(simulate_scan(c, det, scan, variable, conf.angles))
        curves[label] = entry

    result = {"name": conf.name, "angles": None if conf.angles is None else list(conf.angles), "curves": curves}
    for pairing, rho_label, q_label in ((MINUS_PLUS, "rho-", "q+"), (PLUS_MINUS, "rho+", "q-")):
        block = {
            "analytic": DgczReport.build(
                curves[rho_label]["analytic"], curves[q_label]["analytic"], pairing, conf.angles
            ).to_record(),
            "expected": DgczReport.build(
                curves[rho_label]["expected"], curves[q_label]["expected"], pairing, conf.angles
            ).to_record(),
        }
        if simulate:
            hr, hq = curves[rho_label]["histogram"], curves[q_label]["histogram"]
            block["simulated"] = DgczReport.build(
                hr.fit.variance,
                hq.fit.variance,
                pairing,
                conf.angles,
                std_error=math.hypot(hr.fit.variance_std_error, hq.fit.variance_std_error),
            ).to_record()
        result[pairing] = block
    if conf.angles is not None:
        result["closed_form_sum"] = rotated_dgcz_closed_form(cov, *conf.angles)
    return result


def source_summary(params: SourceParameters) -> dict:
    cov = make_source_state(params)
    summary = StateSummary.from_params(params)
    alpha_sep = separability_angle(params)
    out = {
        "sigma_plus_sq": params.sigma_plus_sq,
        "sigma_minus_sq": params.sigma_minus_sq,
        "S1": summary.S1,
        "S2": summary.S2,
        "source_sum": dgcz_sum_source(cov).sum,
        "source_violated": dgcz_sum_source(cov).violated,
        "alpha_sep": alpha_sep,
    }
    if summary.S1 != summary.S2:
        out["threshold"] = violation_threshold(summary)
        out["violation_possible_at_alpha_sep"] = violation_possible(summary, 2 * alpha_sep)
    return out


def _condition(params, angles):
    summary = StateSummary.from_params(params)
    if summary.S1 == summary.S2 or angles is None:
        return None
    return violation_possible(summary, sum(angles))


def migration_scan(params: SourceParameters, n_angles: int, grid_points: int) -> dict:
    cov = make_source_state(params)
    alphas = np.linspace(0.0, PI / 2, n_angles)
    grid = GridSpec(grid_points)
    k_values = [real_part_schmidt_number(params, a, grid) for a in alphas]
    correlations = [position_correlation(cov, a, a) for a in alphas]
    alpha_sep = separability_angle(params)
    best = int(np.argmin(k_values))
    return {
        "alpha": alphas.tolist(),
        "schmidt_number": k_values,
        "position_covariance": correlations,
        "alpha_min": float(alphas[best]),
        "alpha_sep": alpha_sep,
        "grid_step": float(alphas[1] - alphas[0]) if n_angles > 1 else 0.0,
        "position_covariance_at_alpha_sep": position_correlation(cov, alpha_sep, alpha_sep),
    }


def perturbation_study(config: ScenarioConfig, cov, configurations) -> list:
    """Worst-case variance of each measured curve under +/-epsilon gap errors."""
    rows = []
    for conf in configurations:
        for label, plane, combo, _, _ in _CURVES[:1] + _CURVES[2:3]:
            systems = conf.rho_systems if plane == "rho" else conf.q_systems

            def objective(s, i, combo=combo):
                return _plane(cov, (s, i)).variance(combo)

            ps, pi_, value, pattern = worst_case_pair(systems[0], systems[1], config.epsilon, objective)
            rows.append(
                {
                    "configuration": conf.name,
                    "curve": label,
                    "ideal": objective(*systems),
                    "worst_case": value,
                    "pattern": list(pattern),
                    "systems": (ps, pi_),
                }
            )
    return rows


def predict(config: ScenarioConfig) -> dict:
    """Analytic report, no sampling."""
    return _report(config, simulate=False)[0]


def _report(config: ScenarioConfig, simulate: bool):
    params = config.source_parameters()
    cov = make_source_state(params)
    report = {
        "scenario": config.scenario,
        "seed": config.seed,
        "events": config.events,
        "resolved": {
            **source_summary(params),
            "k": config.optics.k,
            "f_prime": config.optics.f_prime,
        },
        "configurations": [],
    }
    histograms = {}
    configurations = scenario_configurations(config)
    if config.scenario == "perturbation-study":
        rows = perturbation_study(config, cov, configurations)
        report["perturbation"] = {
            "epsilon": config.epsilon,
            "curves": [{k: v for k, v in r.items() if k != "systems"} for r in rows],
        }
        worst = {(r["configuration"], r["curve"]): r["systems"] for r in rows}
        perturbed = []
        for conf in configurations:
            perturbed.append(
                Configuration(
                    name=conf.name + "-perturbed",
                    angles=conf.angles,
                    rho_systems=worst[(conf.name, "rho-")],
                    q_systems=worst[(conf.name, "q+")],
                )
            )
        configurations = perturbed
    for n, conf in enumerate(configurations):
        result = analyse_configuration(config, cov, conf, seed_offset=10 * n, simulate=simulate)
        result["violation_possible"] = _condition(params, conf.angles)
        for label, entry in result["curves"].items():
            hist = entry.pop("histogram", None)
            if hist is not None:
                histograms[f"{conf.name}_{label}"] = hist
                entry["simulated"] = hist.fit.variance
                entry["simulated_std_error"] = hist.fit.variance_std_error
                entry["warnings"] = list(hist.warnings)
        report["configurations"].append(result)
    if config.scenario == "migration-scan":
        report["migration"] = migration_scan(params, config.n_angles, config.grid_points)
    return report, histograms


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], out)
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, out)
    else:
        out.append((prefix, value))
    return out


def report_to_csv(report: dict) -> str:
    """Flat ``key,value`` rows; long numeric lists are kept in their own files."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in _flatten("", {k: v for k, v in report.items() if k != "migration"}, []):
        writer.writerow([key, json.dumps(value) if isinstance(value, list) else repr(value) if isinstance(value, float) else value])
    return buffer.getvalue()


def run_scenario(config: ScenarioConfig, out_dir, fmt: str = "json") -> dict:
    """Run a scenario and write report, histogram CSVs and plots into ``out_dir``.

    Files created by a failing run are removed before the error propagates.
    """
    from .plotting import emit_plot

    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be json or csv, got {fmt!r}")
    report, histograms = _report(config, simulate=True)
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def write(name, text):
        path = os.path.join(out_dir, name)
        written.append(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return name

    try:
        manifest = []
        for key in sorted(histograms):
            manifest.append(write(f"hist_{key}.csv", histograms[key].to_csv()))
        report["histograms"] = {key: histograms[key].to_dict() for key in sorted(histograms)}
        by_conf = {}
        for key in sorted(histograms):
            by_conf.setdefault(key.rsplit("_", 1)[0], []).append(histograms[key])
        for conf_name, hists in by_conf.items():
            path = os.path.join(out_dir, f"coincidences_{conf_name}.svg")
            written.append(path)
            emit_plot(hists, path, title=conf_name)
            manifest.append(os.path.basename(path))
        if "migration" in report:
            m = report["migration"]
            rows = ["alpha,schmidt_number,position_covariance"]
            rows += [f"{a!r},{k!r},{c!r}" for a, k, c in zip(m["alpha"], m["schmidt_number"], m["position_covariance"])]
            manifest.append(write("migration_scan.csv", "\n".join(rows) + "\n"))
            path = os.path.join(out_dir, "migration_scan.svg")
            written.append(path)
            emit_plot(
                {"x": m["alpha"], "y": m["schmidt_number"], "xlabel": "FRFT order (rad)",
                 "ylabel": "Schmidt number of |amplitude|", "marker": m["alpha_sep"]},
                path,
                title="migration-scan",
            )
            manifest.append("migration_scan.svg")
        report_name = f"report.{fmt}"
        report["files"] = manifest + [report_name]
        if fmt == "json":
            write(report_name, json.dumps(report, indent=2, sort_keys=True) + "\n")
        else:
            write(report_name, report_to_csv(report))
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return report
