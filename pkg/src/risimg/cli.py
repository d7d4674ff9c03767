"""Command-line entry points for scene validation, matrix building, simulation,
recovery, bound maps and sweeps, power reports, and named experiment runs."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import crlb as crlb_mod
from .experiments import EXPERIMENTS, ExperimentSpec, run_experiment
from .forward import (
    NoiseModel,
    build_sensing_matrix,
    draw_sparse_image,
    measurements_to_csv,
    save_matrix,
    synthesize_measurements,
)
from .power import dbm_to_watts, match_pris_tx_power, total_power, watts_to_dbm
from .recovery import default_eps, result_to_csv, sp_recover
from .risconfig import ARIS, PRIS, draw_schedule
from .scene import ConfigError, build_scene, default_config, load_config


def _load(config_path, height=None):
    cfg = load_config(config_path) if config_path else default_config()
    if height is not None:
        cfg["roi"]["center"][2] = float(height)
    return cfg


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _schedule(cfg, scene, mode, seed):
    gain = 1.0 if mode == PRIS else 10.0 ** (cfg["ris_mode"]["amplification_db"] / 10.0)
    return draw_schedule(cfg["sim"]["n_symbols"], scene, mode, gain=gain, seed=seed)


@click.group()
def main():
    """RIS-aided low-altitude imaging toolkit."""


@main.group()
def scene():
    """Scenario geometry commands."""


@scene.command("validate")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def scene_validate(config_path):
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
    except (ConfigError, KeyError) as exc:
        _fail(str(exc))
    click.echo(
        f"ok: {scn.n_voxels} voxels, {scn.n_ris} panels "
        f"({sum(p.n_elements for p in scn.ris)} elements), "
        f"{scn.n_tx}x{scn.n_rx} antennas, wavelength {scn.wavelength:.6g} m"
    )


@main.group()
def matrix():
    """Sensing-matrix commands."""


@matrix.command("build")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice([PRIS, ARIS]), default=PRIS)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", type=click.Path(), default=".")
def matrix_build(config_path, mode, seed, out_dir):
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        sched = _schedule(cfg, scn, mode, seed)
        mat = build_sensing_matrix(scn, sched)
    except Exception as exc:
        _fail(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    prefix = os.path.join(out_dir, f"sensing_matrix_{mode}_seed{seed}")
    save_matrix(mat, prefix)
    click.echo(f"wrote {prefix}.bin ({mat.n_rows}x{mat.n_voxels}) and {prefix}.json")


@main.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice([PRIS, ARIS]), default=ARIS)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", type=click.Path(), default=".")
def simulate(config_path, mode, seed, out_dir):
    """Draw a ground truth, synthesize noisy measurements, and export them."""
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        sched = _schedule(cfg, scn, mode, seed)
        mat = build_sensing_matrix(scn, sched)
        image = draw_sparse_image(scn.n_voxels, cfg["sim"]["sparsity"], seed + 1)
        noise = NoiseModel.from_config(cfg, scn)
        ms = synthesize_measurements(mat, image, noise, seed + 2, scene=scn, schedule=sched)
    except Exception as exc:
        _fail(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"measurements_{mode}_seed{seed}.csv")
    measurements_to_csv(ms, mat, path)
    click.echo(f"wrote {path} (L={mat.n_rows}, support={list(map(int, image.support))})")


@main.command("recover")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice([PRIS, ARIS]), default=ARIS)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", type=click.Path(), default=".")
def recover(config_path, mode, seed, out_dir):
    """Simulate one trial end to end and export the subspace-pursuit estimate."""
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        sched = _schedule(cfg, scn, mode, seed)
        mat = build_sensing_matrix(scn, sched)
        image = draw_sparse_image(scn.n_voxels, cfg["sim"]["sparsity"], seed + 1)
        noise = NoiseModel.from_config(cfg, scn)
        ms = synthesize_measurements(mat, image, noise, seed + 2, scene=scn, schedule=sched)
        result = sp_recover(
            ms.y, mat.entries, cfg["sim"]["sparsity"], eps=default_eps(mat.n_rows, noise.sigma2_eff)
        )
    except Exception as exc:
        _fail(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"recovery_{mode}_seed{seed}.csv")
    result_to_csv(result, image, path)
    hit = len(set(map(int, image.support)) & set(map(int, result.support)))
    click.echo(f"wrote {path} ({hit}/{image.sparsity} support indices recovered, {result.reason})")


@main.group("crlb")
def crlb_group():
    """Bound evaluation commands."""


@crlb_group.command("map")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--exact", is_flag=True, help="use per-element distances instead of centers")
@click.option("--out", "out_path", type=click.Path(), default="crlb_map.csv")
def crlb_map_cmd(config_path, exact, out_path):
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        gain = 10.0 ** (cfg["ris_mode"]["amplification_db"] / 10.0)
        p_tx = dbm_to_watts(cfg["power"]["p_tx_dbm"])
        gamma = p_tx / (scn.n_tx * dbm_to_watts(cfg["noise"]["sigma2_rx_dbm"]))
        cmap = crlb_mod.expected_crlb_map(scn, gain, gamma, cfg["sim"]["n_symbols"], approximate=not exact)
    except Exception as exc:
        _fail(str(exc))
    voxels = scn.roi.voxel_centers
    with open(out_path, "w") as fh:
        fh.write("voxel_index,x,y,z,value\n")
        for n in range(scn.n_voxels):
            fh.write(f"{n},{voxels[n, 0]!r},{voxels[n, 1]!r},{voxels[n, 2]!r},{cmap.values[n]!r}\n")
    click.echo(f"wrote {out_path} ({cmap.variant}, mean {np.mean(cmap.values):.6g})")


@crlb_group.command("sweep")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--parameter", type=click.Choice(["rx", "tx", "d"]), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def crlb_sweep_cmd(config_path, parameter, out_path):
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        gain = 10.0 ** (cfg["ris_mode"]["amplification_db"] / 10.0)
        p_tx = dbm_to_watts(cfg["power"]["p_tx_dbm"])
        gamma = p_tx / (scn.n_tx * dbm_to_watts(cfg["noise"]["sigma2_rx_dbm"]))
        rows = crlb_mod.placement_sweep(cfg, parameter, gain, gamma, cfg["sim"]["n_symbols"])
    except Exception as exc:
        _fail(str(exc))
    out_path = out_path or f"{parameter}_sweep.csv"
    header = "d,height_m,mean_crlb" if parameter == "d" else "param_x,param_y,mean_crlb"
    with open(out_path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    best = min(rows, key=lambda r: r[-1])
    click.echo(f"wrote {out_path}; minimum {best[-1]:.6g} at {best[:-1]}")


@main.group("power")
def power_group():
    """Power-ledger commands."""


@power_group.command("report")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice([PRIS, ARIS]), default=ARIS)
@click.option("--p-tx-dbm", type=float, default=None)
@click.option("--seed", type=int, default=0)
def power_report(config_path, mode, p_tx_dbm, seed):
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        p_tx = dbm_to_watts(p_tx_dbm if p_tx_dbm is not None else cfg["power"]["p_tx_dbm"])
        sched = _schedule(cfg, scn, mode, seed)
        report = total_power(
            mode,
            p_tx,
            scn,
            sched,
            p_c=dbm_to_watts(cfg["power"]["p_c_dbm"]),
            p_dc=dbm_to_watts(cfg["power"]["p_dc_dbm"]),
            sigma2_ris=dbm_to_watts(cfg["noise"]["sigma2_ris_dbm"]),
        )
    except Exception as exc:
        _fail(str(exc))
    click.echo("mode,P_TX_W,P_M_total_W,circuit_W,total_W")
    click.echo(report.csv_row())


@power_group.command("match")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--p-tx-aris-dbm", type=float, required=True)
@click.option("--seed", type=int, default=0)
def power_match(config_path, p_tx_aris_dbm, seed):
    try:
        cfg = _load(config_path)
        scn = build_scene(cfg)
        sched = _schedule(cfg, scn, ARIS, seed)
        p_tx_pris = match_pris_tx_power(
            dbm_to_watts(p_tx_aris_dbm),
            scn,
            sched,
            p_c=dbm_to_watts(cfg["power"]["p_c_dbm"]),
            p_dc=dbm_to_watts(cfg["power"]["p_dc_dbm"]),
            sigma2_ris=dbm_to_watts(cfg["noise"]["sigma2_ris_dbm"]),
        )
    except Exception as exc:
        _fail(str(exc))
    click.echo(f"P_TX_PRIS = {p_tx_pris!r} W ({watts_to_dbm(p_tx_pris):.3f} dBm)")


@main.group("experiment")
def experiment_group():
    """Named experiment reproductions."""


@experiment_group.command("run")
@click.argument("name", type=click.Choice(sorted(EXPERIMENTS)))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", type=click.Path(), default="out")
@click.option("--trials", type=int, default=200)
@click.option("--mode", type=click.Choice([PRIS, ARIS]), default=None)
@click.option("--height", type=float, default=None, help="override ROI altitude in meters")
def experiment_run(name, config_path, seed, out_dir, trials, mode, height):
    try:
        cfg = _load(config_path, height=height)
        spec = ExperimentSpec(name=name, config=cfg, out_dir=out_dir, seed=seed, trials=trials, mode=mode)
        outputs = run_experiment(spec)
    except Exception as exc:
        _fail(str(exc))
    for path in outputs:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
