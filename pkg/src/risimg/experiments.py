"""Named experiment reproductions: Monte-Carlo batching, CSV emission, and plots.

CSVs are the interface of record; every emitted file embeds the resolved
configuration and master seed in comment lines, so a rerun with the same inputs
is byte-identical. Plots are a convenience layer rendered from the same data.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import crlb as crlb_mod
from . import metrics as metrics_mod
from .forward import (
    NoiseModel,
    build_sensing_matrix,
    draw_sparse_image,
    noise_power_report,
    synthesize_measurements,
)
from .power import PowerError, dbm_to_watts, match_pris_tx_power, total_power, watts_to_dbm
from .recovery import default_eps, sp_recover
from .risconfig import ARIS, PRIS, PhaseSchedule, draw_schedule
from .scene import build_scene, default_config


@dataclass
class ExperimentSpec:
    name: str
    config: dict
    out_dir: str = "."
    seed: int = 0
    trials: int = 200
    heights: list = None
    power_levels_dbm: list = None
    mode: str = None


def monte_carlo(trials: int, seed: int, trial_fn):
    """Run `trial_fn(index, seed_sequence)` for each trial and aggregate.

    Per-trial seeds are spawned from the master seed by trial index, so results
    do not depend on execution order. Returns (per-trial rows, aggregate dict of
    (mean, standard error) per metric).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    rows = [trial_fn(idx, child) for idx, child in enumerate(children)]
    agg = {}
    for key in rows[0]:
        vals = np.array([row[key] for row in rows], dtype=float)
        stderr = float(np.std(vals, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
        agg[key] = (float(np.mean(vals)), stderr)
    return rows, agg


def _write_csv(path, header: str, lines, config: dict, seed: int) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        fh.write(f"# seed: {seed}\n")
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")


def _plot(path, draw_fn):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    draw_fn(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _scaled_schedule(schedule: PhaseSchedule, gain: float) -> PhaseSchedule:
    """Reuse a unit-gain phase draw as an amplified schedule."""
    amp = np.sqrt(gain)
    return PhaseSchedule(
        mode=ARIS,
        gain=gain,
        coefficients=tuple(amp * c for c in schedule.coefficients),
        seed=schedule.seed,
    )


def _gamma(config: dict, scene, p_tx: float) -> float:
    sigma2_rx = dbm_to_watts(config["noise"]["sigma2_rx_dbm"])
    return p_tx / (scene.n_tx * sigma2_rx)


def _recovery_trial(scene, config, matrix_entries, schedule, image, p_tx: float, noise_seed: int, factors=None):
    """One synthesis + subspace-pursuit recovery; returns the per-trial metrics."""
    noise = NoiseModel.from_config(config, scene, p_tx_watts=p_tx)
    from .forward import SensingMatrix

    matrix = SensingMatrix(
        entries=matrix_entries,
        n_tx=scene.n_tx,
        n_symbols=schedule.n_symbols,
        n_panels=scene.n_ris,
        n_rx=scene.n_rx,
    )
    ms = synthesize_measurements(matrix, image, noise, noise_seed, scene=scene, schedule=schedule, factors=factors)
    sparsity = config["sim"]["sparsity"]
    eps = default_eps(matrix.n_rows, noise.sigma2_eff)
    result = sp_recover(ms.y, matrix_entries, sparsity, eps=eps)
    x_true = image.dense()
    x_est_c = result.estimate.dense()
    mse_real = metrics_mod.mse(x_true, x_est_c)
    mse_complex = float(np.sum(np.abs(x_true - x_est_c) ** 2) / len(x_true))
    dr = metrics_mod.detection_rate(image.support, result.support)
    return {
        "mse": mse_real,
        "mse_complex": mse_complex,
        "dr": dr,
        "max_abs": float(np.max(np.abs(x_true))),
    }, result


def _height_context(config, height: float):
    """Scene and cached geometry factors for one ROI altitude."""
    from .forward import SceneFactors

    cfg = copy.deepcopy(config)
    cfg["roi"]["center"][2] = float(height)
    scene = build_scene(cfg)
    return cfg, scene, SceneFactors(scene)


def _draw_trial(cfg, scene, factors, seed_seq):
    """Ground truth, unit-gain schedule, and its sensing matrix for one trial."""
    s_sched, s_image, s_noise = seed_seq.spawn(3)
    n_sym = cfg["sim"]["n_symbols"]
    schedule = draw_schedule(n_sym, scene, PRIS, 1.0, seed=int(s_sched.generate_state(1)[0] >> 1))
    image = draw_sparse_image(scene.n_voxels, cfg["sim"]["sparsity"], np.random.default_rng(s_image))
    matrix = build_sensing_matrix(scene, schedule, factors=factors)
    noise_seed = int(s_noise.generate_state(1)[0] >> 1)
    return schedule, image, matrix, noise_seed


DEFAULT_POWERS_DBM = [20.0, 25.0, 30.0, 35.0]


def exp_approx_vs_exact_crlb(spec: ExperimentSpec):
    config = spec.config
    scene = build_scene(config)
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    gamma = _gamma(config, scene, dbm_to_watts(config["power"]["p_tx_dbm"]))
    n_sym = config["sim"]["n_symbols"]
    exact = crlb_mod.expected_crlb_map(scene, gain, gamma, n_sym, approximate=False)
    approx = crlb_mod.expected_crlb_map(scene, gain, gamma, n_sym, approximate=True)
    voxels = scene.roi.voxel_centers
    lines = [
        f"{n},{float(voxels[n, 0])!r},{float(voxels[n, 1])!r},{float(voxels[n, 2])!r},"
        f"{float(exact.values[n])!r},{float(approx.values[n])!r}"
        for n in range(scene.n_voxels)
    ]
    out = os.path.join(spec.out_dir, "approx_vs_exact_crlb.csv")
    _write_csv(out, "voxel_index,x,y,z,exact,approx", lines, config, spec.seed)

    def draw(ax):
        order = np.argsort(exact.values)
        ax.semilogy(exact.values[order], label="exact expectation")
        ax.semilogy(approx.values[order], "--", label="center approximation")
        ax.set_xlabel("voxel (sorted)")
        ax.set_ylabel("expected bound")
        ax.legend()

    _plot(os.path.join(spec.out_dir, "approx_vs_exact_crlb.png"), draw)
    return [out]


def exp_crlb_map(spec: ExperimentSpec):
    config = spec.config
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    n_sym = config["sim"]["n_symbols"]
    outputs = []
    for tag, rx_center in (("rx_offset", [0.0, 60.0, 30.0]), ("rx_centered", [0.0, 0.0, 30.0])):
        cfg = copy.deepcopy(config)
        cfg["rx"]["center"] = rx_center
        scene = build_scene(cfg)
        gamma = _gamma(cfg, scene, dbm_to_watts(cfg["power"]["p_tx_dbm"]))
        amap = crlb_mod.expected_crlb_map(scene, gain, gamma, n_sym, approximate=True)
        voxels = scene.roi.voxel_centers
        lines = [
            f"{n},{float(voxels[n, 0])!r},{float(voxels[n, 1])!r},{float(voxels[n, 2])!r},{float(amap.values[n])!r}"
            for n in range(scene.n_voxels)
        ]
        out = os.path.join(spec.out_dir, f"crlb_map_{tag}.csv")
        _write_csv(out, "voxel_index,x,y,z,value", lines, cfg, spec.seed)
        outputs.append(out)

        nx, ny, _ = scene.roi.counts

        def draw(ax, values=amap.values, nx=nx, ny=ny, tag=tag):
            img = values.reshape(ny, nx)
            im = ax.imshow(np.log10(img), origin="lower", extent=[-60, 60, -60, 60])
            ax.figure.colorbar(im, ax=ax, label="log10 expected bound")
            ax.set_xlabel("x [m]")
            ax.set_ylabel("y [m]")
            ax.set_title(tag)

        _plot(os.path.join(spec.out_dir, f"crlb_map_{tag}.png"), draw)
    return outputs


def _sweep_experiment(spec: ExperimentSpec, parameter: str):
    config = spec.config
    scene = build_scene(config)
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    gamma = _gamma(config, scene, dbm_to_watts(config["power"]["p_tx_dbm"]))
    n_sym = config["sim"]["n_symbols"]
    rows = crlb_mod.placement_sweep(config, parameter, gain, gamma, n_sym)
    if parameter == "d":
        header = "d,height_m,mean_crlb"
    else:
        header = "x,y,mean_crlb"
    lines = [",".join(repr(float(v)) for v in row) for row in rows]
    out = os.path.join(spec.out_dir, f"{parameter}_sweep.csv")
    _write_csv(out, header, lines, config, spec.seed)

    def draw(ax):
        arr = np.array(rows)
        if parameter == "d":
            for h in np.unique(arr[:, 1]):
                sel = arr[arr[:, 1] == h]
                ax.semilogy(sel[:, 0], sel[:, 2], marker="o", label=f"height {h:g} m")
            ax.set_xlabel("panel half-spacing d [m]")
            ax.legend()
        else:
            n = int(np.sqrt(len(arr)))
            im = ax.imshow(
                np.log10(arr[:, 2].reshape(n, n).T), origin="lower", extent=[-60, 60, -60, 60]
            )
            ax.figure.colorbar(im, ax=ax, label="log10 mean bound")
            ax.set_xlabel(f"{parameter} x [m]")
            ax.set_ylabel(f"{parameter} y [m]")
        ax.set_ylabel(ax.get_ylabel() or "mean bound")

    _plot(os.path.join(spec.out_dir, f"{parameter}_sweep.png"), draw)
    return [out]


def exp_rx_sweep(spec):
    return _sweep_experiment(spec, "rx")


def exp_tx_sweep(spec):
    return _sweep_experiment(spec, "tx")


def exp_d_sweep(spec):
    return _sweep_experiment(spec, "d")


def exp_noise_compare(spec: ExperimentSpec):
    heights = [float(h) for h in (spec.heights or np.arange(50.0, 401.0, 25.0))]
    trials = spec.trials or 500
    rows = noise_power_report(spec.config, heights, trials=trials, seed=spec.seed)
    lines = [f"{r['height_m']!r},{r['z_ari_dbm']!r},{r['v_dbm']!r}" for r in rows]
    out = os.path.join(spec.out_dir, "noise_compare.csv")
    _write_csv(out, "height_m,z_ari_dbm,v_dbm", lines, spec.config, spec.seed)

    def draw(ax):
        hs = [r["height_m"] for r in rows]
        ax.plot(hs, [r["z_ari_dbm"] for r in rows], marker="o", label="amplifier noise at RX")
        ax.plot(hs, [r["v_dbm"] for r in rows], marker="s", label="receiver noise")
        ax.set_xlabel("ROI height [m]")
        ax.set_ylabel("power [dBm]")
        ax.legend()

    _plot(os.path.join(spec.out_dir, "noise_compare.png"), draw)
    return [out]


def matched_power_pair(config, scene, schedule_aris, p_tx_aris: float, factors=None):
    """(ARIS total power, matched PRIS transmit power) for one schedule draw."""
    p_c = dbm_to_watts(config["power"]["p_c_dbm"])
    p_dc = dbm_to_watts(config["power"]["p_dc_dbm"])
    sigma2_ris = dbm_to_watts(config["noise"]["sigma2_ris_dbm"])
    report = total_power(
        ARIS, p_tx_aris, scene, schedule_aris, p_c=p_c, p_dc=p_dc, sigma2_ris=sigma2_ris, factors=factors
    )
    p_tx_pris = report.total - sum(panel.n_elements for panel in scene.ris) * p_c
    if p_tx_pris <= 0:
        raise PowerError(f"matched passive transmit power is non-positive ({p_tx_pris} W)")
    return report.total, p_tx_pris


def run_matched_comparison(config, heights, powers_dbm, trials, seed, progress=None):
    """Shared Monte-Carlo core of the matched-power mode comparison.

    Per trial, one unit-gain phase draw serves both modes (the active matrix is
    the passive one scaled by sqrt(a)), and each power level reuses the same
    matrix with its own noise realization. Returns per-trial rows.
    """
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    rows = []
    for height in heights:
        cfg, scene, factors = _height_context(config, height)
        children = np.random.SeedSequence([seed, int(round(height * 1000))]).spawn(trials)
        for trial, child in enumerate(children):
            schedule, image, matrix, noise_seed = _draw_trial(cfg, scene, factors, child)
            aris_sched = _scaled_schedule(schedule, gain)
            aris_entries = np.sqrt(gain) * matrix.entries
            for p_idx, p_dbm in enumerate(powers_dbm):
                p_tx_aris = dbm_to_watts(p_dbm)
                p_sum, p_tx_pris = matched_power_pair(cfg, scene, aris_sched, p_tx_aris, factors=factors)
                m_aris, _ = _recovery_trial(
                    scene, cfg, aris_entries, aris_sched, image, p_tx_aris, noise_seed + 2 * p_idx, factors=factors
                )
                m_pris, _ = _recovery_trial(
                    scene, cfg, matrix.entries, schedule, image, p_tx_pris, noise_seed + 2 * p_idx + 1, factors=factors
                )
                for mode, m, p_tx in ((ARIS, m_aris, p_tx_aris), (PRIS, m_pris, p_tx_pris)):
                    rows.append(
                        {
                            "trial": trial,
                            "height_m": height,
                            "mode": mode,
                            "p_tx_aris_dbm": p_dbm,
                            "p_tx_w": p_tx,
                            "p_sum_w": p_sum,
                            "mse": m["mse"],
                            "dr": m["dr"],
                            "psnr_db": metrics_mod.psnr(m["max_abs"], m["mse"]),
                            "psnr_per_w": metrics_mod.psnr_per_watt(m["mse"], m["max_abs"], p_sum),
                        }
                    )
            if progress:
                progress(height, trial)
    return rows


def _emit_matched(spec, rows, stem):
    header = "trial,height_m,mode,p_tx_aris_dbm,p_tx_w,p_sum_w,mse,dr,psnr_db,psnr_per_w"
    lines = [
        f"{r['trial']},{r['height_m']!r},{r['mode']},{r['p_tx_aris_dbm']!r},{r['p_tx_w']!r},"
        f"{r['p_sum_w']!r},{r['mse']!r},{r['dr']!r},{r['psnr_db']!r},{r['psnr_per_w']!r}"
        for r in rows
    ]
    trial_path = os.path.join(spec.out_dir, f"{stem}_trials.csv")
    _write_csv(trial_path, header, lines, spec.config, spec.seed)

    # aggregate over trials per (height, mode, power)
    keys = sorted({(r["height_m"], r["mode"], r["p_tx_aris_dbm"]) for r in rows})
    agg_lines = []
    agg = {}
    for key in keys:
        sel = [r for r in rows if (r["height_m"], r["mode"], r["p_tx_aris_dbm"]) == key]
        n = len(sel)
        entry = {}
        for metric in ("mse", "dr", "psnr_per_w", "p_sum_w"):
            vals = np.array([r[metric] for r in sel])
            entry[metric] = (float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0)
        agg[key] = entry
        agg_lines.append(
            f"{key[0]!r},{key[1]},{key[2]!r},{n},{entry['mse'][0]!r},{entry['mse'][1]!r},"
            f"{entry['dr'][0]!r},{entry['dr'][1]!r},{entry['psnr_per_w'][0]!r},{entry['p_sum_w'][0]!r}"
        )
    agg_path = os.path.join(spec.out_dir, f"{stem}.csv")
    _write_csv(
        agg_path,
        "height_m,mode,p_tx_aris_dbm,trials,mse_mean,mse_stderr,dr_mean,dr_stderr,psnr_per_w_mean,p_sum_w_mean",
        agg_lines,
        spec.config,
        spec.seed,
    )
    return trial_path, agg_path, agg


def exp_aris_vs_pris(spec: ExperimentSpec):
    heights = spec.heights or [100.0, 150.0, 200.0, 250.0]
    powers = spec.power_levels_dbm or DEFAULT_POWERS_DBM
    rows = run_matched_comparison(spec.config, heights, powers, spec.trials, spec.seed)
    trial_path, agg_path, agg = _emit_matched(spec, rows, "aris_vs_pris")

    def draw(ax):
        for mode, style in ((ARIS, "-"), (PRIS, "--")):
            for p in powers:
                hs = sorted({k[0] for k in agg if k[1] == mode and k[2] == p})
                ax.semilogy(
                    hs, [agg[(h, mode, p)]["mse"][0] for h in hs], style, marker="o",
                    label=f"{mode} {p:g} dBm",
                )
        ax.set_xlabel("ROI height [m]")
        ax.set_ylabel("MSE")
        ax.legend(fontsize=7)

    _plot(os.path.join(spec.out_dir, "aris_vs_pris_mse.png"), draw)

    def draw_dr(ax):
        for mode, style in ((ARIS, "-"), (PRIS, "--")):
            for p in powers:
                hs = sorted({k[0] for k in agg if k[1] == mode and k[2] == p})
                ax.plot(hs, [agg[(h, mode, p)]["dr"][0] for h in hs], style, marker="o", label=f"{mode} {p:g} dBm")
        ax.set_xlabel("ROI height [m]")
        ax.set_ylabel("detection rate")
        ax.legend(fontsize=7)

    _plot(os.path.join(spec.out_dir, "aris_vs_pris_dr.png"), draw_dr)
    return [trial_path, agg_path]


def exp_psnr_per_watt(spec: ExperimentSpec):
    heights = spec.heights or [50.0, 100.0, 150.0, 200.0, 250.0]
    powers = spec.power_levels_dbm or DEFAULT_POWERS_DBM
    rows = run_matched_comparison(spec.config, heights, powers, spec.trials, spec.seed)
    trial_path, agg_path, agg = _emit_matched(spec, rows, "psnr_per_watt")

    def draw(ax):
        for mode, style in ((ARIS, "-"), (PRIS, "--")):
            for p in powers:
                hs = sorted({k[0] for k in agg if k[1] == mode and k[2] == p})
                ax.plot(
                    hs, [agg[(h, mode, p)]["psnr_per_w"][0] for h in hs], style, marker="o",
                    label=f"{mode} {p:g} dBm",
                )
        ax.set_xlabel("ROI height [m]")
        ax.set_ylabel("PSNR per Watt [dB/W]")
        ax.legend(fontsize=7)

    _plot(os.path.join(spec.out_dir, "psnr_per_watt.png"), draw)
    return [trial_path, agg_path]


def run_height_limit(config, heights, p_tx_dbm, trials, seed):
    """Active-mode MSE versus the realized-support bound across ROI heights."""
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    p_tx = dbm_to_watts(p_tx_dbm)
    rows = []
    for height in heights:
        cfg, scene, factors = _height_context(config, height)
        gamma = _gamma(cfg, scene, p_tx)
        children = np.random.SeedSequence([seed, int(round(height * 1000))]).spawn(trials)
        for trial, child in enumerate(children):
            schedule, image, matrix, noise_seed = _draw_trial(cfg, scene, factors, child)
            aris_sched = _scaled_schedule(schedule, gain)
            aris_entries = np.sqrt(gain) * matrix.entries
            _, crlb_avg = crlb_mod.crlb_on_support(aris_entries, image.support, gamma)
            crlb_mse = float(image.sparsity * crlb_avg / scene.n_voxels)
            m, _ = _recovery_trial(scene, cfg, aris_entries, aris_sched, image, p_tx, noise_seed, factors=factors)
            rows.append(
                {
                    "trial": trial,
                    "height_m": height,
                    "mse": m["mse"],
                    "mse_complex": m["mse_complex"],
                    "dr": m["dr"],
                    "crlb_mse": crlb_mse,
                }
            )
    return rows


def exp_height_limit(spec: ExperimentSpec):
    heights = [float(h) for h in (spec.heights or np.arange(50.0, 401.0, 50.0))]
    p_tx_dbm = spec.config["power"]["p_tx_dbm"]
    rows = run_height_limit(spec.config, heights, p_tx_dbm, spec.trials, spec.seed)
    header = "trial,height_m,mse,mse_complex,dr,crlb_mse"
    lines = [
        f"{r['trial']},{r['height_m']!r},{r['mse']!r},{r['mse_complex']!r},{r['dr']!r},{r['crlb_mse']!r}"
        for r in rows
    ]
    trial_path = os.path.join(spec.out_dir, "height_limit_trials.csv")
    _write_csv(trial_path, header, lines, spec.config, spec.seed)

    agg_lines = []
    means = {}
    for h in heights:
        sel = [r for r in rows if r["height_m"] == h]
        mc = float(np.mean([r["mse_complex"] for r in sel]))
        mr = float(np.mean([r["mse"] for r in sel]))
        cb = float(np.mean([r["crlb_mse"] for r in sel]))
        dr = float(np.mean([r["dr"] for r in sel]))
        means[h] = (mr, mc, cb, dr)
        agg_lines.append(f"{h!r},{len(sel)},{mr!r},{mc!r},{cb!r},{dr!r}")
    agg_path = os.path.join(spec.out_dir, "height_limit.csv")
    _write_csv(agg_path, "height_m,trials,mse_mean,mse_complex_mean,crlb_mse_mean,dr_mean", agg_lines, spec.config, spec.seed)

    def draw(ax):
        hs = list(means)
        ax.plot(hs, [10 * np.log10(means[h][1]) for h in hs], marker="o", label="MSE")
        ax.plot(hs, [10 * np.log10(means[h][2]) for h in hs], marker="s", label="bound")
        ax.axhline(-20.0, color="gray", linestyle=":")
        ax.set_xlabel("ROI height [m]")
        ax.set_ylabel("MSE [dB]")
        ax.legend()

    _plot(os.path.join(spec.out_dir, "height_limit.png"), draw)
    return [trial_path, agg_path]


def _mse_position_sweep(spec: ExperimentSpec, entity: str):
    """Full-simulation MSE versus RX/TX y-position or panel half-spacing."""
    config = spec.config
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    p_tx = dbm_to_watts(config["power"]["p_tx_dbm"])
    height = config["roi"]["center"][2]
    if entity == "d":
        params = [(d, None) for d in np.arange(10.0, 61.0, 5.0)]
    else:
        params = [(y, None) for y in np.arange(-60.0, 61.0, 10.0)]
    rows = []
    for value, _ in params:
        cfg = copy.deepcopy(config)
        if entity == "rx":
            cfg["rx"]["center"] = [0.0, float(value), 30.0]
        elif entity == "tx":
            cfg["tx"]["center"] = [30.0, float(value), 30.0]
        else:
            for pcfg, (sx, sy) in zip(cfg["ris"], [(1, 1), (-1, 1), (1, -1), (-1, -1)]):
                pcfg["center"] = [sx * float(value), sy * float(value), 25.0]
        children = np.random.SeedSequence([spec.seed, int(round(value * 1000)) & 0x7FFFFFFF]).spawn(spec.trials)
        cfg_t, scene, factors = _height_context(cfg, height)
        mses = []
        for child in children:
            schedule, image, matrix, noise_seed = _draw_trial(cfg_t, scene, factors, child)
            aris_sched = _scaled_schedule(schedule, gain)
            m, _ = _recovery_trial(
                scene, cfg_t, np.sqrt(gain) * matrix.entries, aris_sched, image, p_tx, noise_seed, factors=factors
            )
            mses.append(m["mse"])
        rows.append((float(value), float(np.mean(mses)), float(np.std(mses, ddof=1) / np.sqrt(len(mses))) if len(mses) > 1 else 0.0))
    out = os.path.join(spec.out_dir, f"{entity}_mse_sweep.csv")
    label = "d" if entity == "d" else "y"
    _write_csv(out, f"{label},mse_mean,mse_stderr", [",".join(repr(v) for v in r) for r in rows], config, spec.seed)

    def draw(ax):
        arr = np.array(rows)
        ax.semilogy(arr[:, 0], arr[:, 1], marker="o")
        ax.set_xlabel(f"{entity} {label} [m]")
        ax.set_ylabel("MSE")

    _plot(os.path.join(spec.out_dir, f"{entity}_mse_sweep.png"), draw)
    return [out]


def exp_rx_mse_sweep(spec):
    return _mse_position_sweep(spec, "rx")


def exp_tx_mse_sweep(spec):
    return _mse_position_sweep(spec, "tx")


def exp_d_mse_sweep(spec):
    return _mse_position_sweep(spec, "d")


EXPERIMENTS = {
    "approx-vs-exact-crlb": exp_approx_vs_exact_crlb,
    "crlb-map": exp_crlb_map,
    "rx-sweep": exp_rx_sweep,
    "tx-sweep": exp_tx_sweep,
    "d-sweep": exp_d_sweep,
    "noise-compare": exp_noise_compare,
    "aris-vs-pris": exp_aris_vs_pris,
    "psnr-per-watt": exp_psnr_per_watt,
    "height-limit": exp_height_limit,
    "rx-mse-sweep": exp_rx_mse_sweep,
    "tx-mse-sweep": exp_tx_mse_sweep,
    "d-mse-sweep": exp_d_mse_sweep,
}


def run_experiment(spec: ExperimentSpec):
    """Run a named experiment; returns the list of emitted CSV paths."""
    if spec.name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {spec.name!r}; choose from {sorted(EXPERIMENTS)}")
    if spec.config is None:
        spec.config = default_config()
    if spec.trials < 1:
        raise ValueError("trials must be >= 1")
    os.makedirs(spec.out_dir, exist_ok=True)
    return EXPERIMENTS[spec.name](spec)
