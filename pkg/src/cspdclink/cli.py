"""Command-line front end.

Subcommands: ``modes`` (per-mode decomposition artifact), ``table``
(single-mode vs multiplexed link comparison), ``spectrum`` (plot-ready signal
sweep), ``verify`` (numerical self-checks) and ``solve`` (reference photon
number from fidelity targets).  All physics parameters come from one config
file; artifacts embed the resolved configuration and are byte-stable for a
given config.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import __version__
from .cavity import (
    CavityParams,
    airy_lorentzian_sum,
    airy_normalized,
)
from .config import ConfigError, RunConfig, load_config
from .link import (
    LinkParams,
    attenuation,
    evaluate_link,
    fidelity_single,
    heralding_probability_single,
    improvement_ratios,
    solve_mu0_for_fidelity,
)
from .spectral import (
    QuadratureError,
    SourceSpec,
    cluster_detuning,
    jsa_approx,
    jsi_approx,
    mode_amplitude_signal,
    mode_table,
    normalization_constants,
    signal_spectrum_samples,
)
from .tmsv import mean_photon_number, thermal_distribution

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3
EXIT_VERIFY_FAILED = 4

FIDELITY_ROUND_TRIP_TOL = 1e-4


def _fmt_full(value) -> str:
    return repr(float(value))


def _fmt_sig(value, sigfigs: int) -> str:
    return f"{float(value):.{sigfigs}g}"


def _write_csv(path: Path, echo, header, rows) -> None:
    lines = [f"# {key} = {value}" for key, value in echo]
    lines.append(",".join(header))
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, echo, rows) -> None:
    payload = {"config": {key: value for key, value in echo}, "rows": rows}
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _echo_with_tool(cfg: RunConfig):
    return (("tool", f"cspdclink {__version__}"),) + cfg.echo


def _out_dir(cfg: RunConfig, args) -> Path:
    out = Path(args.out) if args.out else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _out_format(cfg: RunConfig, args) -> str:
    return args.format if args.format else cfg.out_format


def _solved_scenarios(cfg: RunConfig, index: int):
    """(mu0, origin) pairs for one link length: configured values, then
    solver-filled fidelity targets (round-trip checked)."""
    length = cfg.lengths_km[index]
    scenarios = [(mu0, "configured") for mu0 in cfg.mu0_by_length[index]]
    for target in cfg.fidelity_targets_by_length[index]:
        mu0 = solve_mu0_for_fidelity(
            target, length, cfg.eta_det, cfg.alpha_att_db_per_km
        )
        achieved = fidelity_single(
            mu0, attenuation(length, cfg.alpha_att_db_per_km), cfg.eta_det
        )
        if abs(achieved - target) > FIDELITY_ROUND_TRIP_TOL:
            raise RuntimeError(
                f"solver round trip failed at L={length} km: target {target}, "
                f"achieved {achieved}"
            )
        scenarios.append((mu0, f"fidelity_target={target!r}"))
    return scenarios


def cmd_modes(cfg: RunConfig, args) -> int:
    spec = cfg.source
    table = mode_table(spec)
    mu0_values = cfg.mu0_values
    mu_columns = [
        np.asarray(mean_photon_number(mu0, table.ratio)) for mu0 in mu0_values
    ]

    header = ["k", "delta_hz", "c_s", "c_i", "ratio"] + [
        f"mu_k_at_mu0_{_fmt_full(mu0)}" for mu0 in mu0_values
    ]
    rows = []
    json_rows = []
    for i, k in enumerate(table.k):
        row = [
            str(int(k)),
            _fmt_full(table.delta[i]),
            _fmt_full(table.c_s[i]),
            _fmt_full(table.c_i[i]),
            _fmt_full(table.ratio[i]),
        ] + [_fmt_full(col[i]) for col in mu_columns]
        rows.append(row)
        json_rows.append(dict(zip(header, [int(k)] + [float(x) for x in row[1:]])))

    out = _out_dir(cfg, args)
    fmt = _out_format(cfg, args)
    path = out / f"modes.{fmt}"
    if fmt == "csv":
        _write_csv(path, _echo_with_tool(cfg), header, rows)
    else:
        _write_json(path, _echo_with_tool(cfg), json_rows)
    if not args.quiet:
        print(f"wrote {path} ({table.k.size} modes, envelope max at k={table.envelope_argmax()})")
    return EXIT_OK


def cmd_table(cfg: RunConfig, args) -> int:
    spec = cfg.source
    table = mode_table(spec)
    sig = cfg.table_sigfigs

    header = [
        "l_el_km", "mu0", "mu0_origin", "case",
        "mean_photon_number", "heralding_prob_pct", "fidelity",
        "mu_ratio", "p_ratio",
    ]
    formatted = []
    full = []
    json_rows = []
    for i, length in enumerate(cfg.lengths_km):
        for mu0, origin in _solved_scenarios(cfg, i):
            params = LinkParams(
                l_el_km=length, eta_det=cfg.eta_det, mu0=mu0,
                alpha_att_db_per_km=cfg.alpha_att_db_per_km,
            )
            report = evaluate_link(table, params)
            p_sm = heralding_probability_single(mu0, params.eta_att, cfg.eta_det)
            f_sm = fidelity_single(mu0, params.eta_att, cfg.eta_det)
            mu_ratio, p_ratio = (math.nan, math.nan)
            if mu0 > 0.0:
                mu_ratio, p_ratio = improvement_ratios(report)

            for case, mean, prob, fid, ratios in (
                ("SM", mu0, p_sm, f_sm, ("", "")),
                ("MM", report.mu_multi, report.p_multi, report.f_min,
                 (mu_ratio, p_ratio) if mu0 > 0.0 else ("", "")),
            ):
                base = [_fmt_full(length), _fmt_full(mu0), origin, case]
                formatted.append(base + [
                    _fmt_sig(mean, sig),
                    _fmt_sig(100.0 * prob, sig),
                    _fmt_sig(fid, sig + 1),
                    _fmt_sig(ratios[0], sig) if ratios[0] != "" else "",
                    _fmt_sig(ratios[1], sig) if ratios[1] != "" else "",
                ])
                full.append(base + [
                    _fmt_full(mean), _fmt_full(prob), _fmt_full(fid),
                    _fmt_full(ratios[0]) if ratios[0] != "" else "",
                    _fmt_full(ratios[1]) if ratios[1] != "" else "",
                ])
                json_rows.append({
                    "l_el_km": length, "mu0": mu0, "mu0_origin": origin,
                    "case": case, "mean_photon_number": float(mean),
                    "heralding_prob_pct": float(100.0 * prob),
                    "fidelity": float(fid),
                    "mu_ratio": float(ratios[0]) if ratios[0] != "" else None,
                    "p_ratio": float(ratios[1]) if ratios[1] != "" else None,
                })

    out = _out_dir(cfg, args)
    fmt = _out_format(cfg, args)
    echo = _echo_with_tool(cfg)
    if fmt == "csv":
        path = out / "table.csv"
        _write_csv(path, echo, header, formatted)
        full_path = out / "table_full.csv"
        _write_csv(full_path, echo, header, full)
        written = f"{path} and {full_path}"
    else:
        path = out / "table.json"
        _write_json(path, echo, json_rows)
        written = str(path)
    if not args.quiet:
        print(f"wrote {written} ({len(json_rows)} rows)")
    return EXIT_OK


def _parse_window(raw: str) -> tuple[int, int]:
    try:
        if ":" in raw:
            lo, hi = raw.split(":")
            return int(lo), int(hi)
        half = int(raw)
        return -half, half
    except ValueError:
        raise ConfigError(
            f"--window: expected LO:HI mode indices or a half-width N, got {raw!r}"
        ) from None


def cmd_spectrum(cfg: RunConfig, args) -> int:
    spec = cfg.source
    window = _parse_window(args.window)
    n_points = args.points if args.points else cfg.spectrum_points
    nu, airy_product, xi_center = signal_spectrum_samples(spec, window, n_points)

    header = ["nu_hz", "airy_product", "xi_center"]
    columns = [nu, airy_product, xi_center]
    if args.jsi_slice:
        header.append("jsi_approx")
        columns.append(np.asarray(jsi_approx(spec, nu, spec.nu_p0 - nu)))

    rows = [
        [_fmt_full(col[i]) for col in columns] for i in range(nu.size)
    ]
    json_rows = [
        {name: float(col[i]) for name, col in zip(header, columns)}
        for i in range(nu.size)
    ]

    out = _out_dir(cfg, args)
    fmt = _out_format(cfg, args)
    path = out / f"spectrum.{fmt}"
    echo = _echo_with_tool(cfg) + (
        ("window_modes", f"{window[0]}:{window[1]}"),
        ("n_points", str(n_points)),
    )
    if fmt == "csv":
        _write_csv(path, echo, header, rows)
    else:
        _write_json(path, echo, json_rows)
    if not args.quiet:
        print(f"wrote {path} ({nu.size} samples over modes {window[0]}..{window[1]})")
    return EXIT_OK


def cmd_solve(cfg: RunConfig, args) -> int:
    if all(not group for group in cfg.fidelity_targets_by_length):
        raise ConfigError("link.fidelity_targets: required for the solve command")

    header = ["l_el_km", "fidelity_target", "mu0", "fidelity_achieved"]
    rows = []
    json_rows = []
    for i, length in enumerate(cfg.lengths_km):
        for target in cfg.fidelity_targets_by_length[i]:
            mu0 = solve_mu0_for_fidelity(
                target, length, cfg.eta_det, cfg.alpha_att_db_per_km
            )
            achieved = fidelity_single(
                mu0, attenuation(length, cfg.alpha_att_db_per_km), cfg.eta_det
            )
            rows.append([
                _fmt_full(length), _fmt_full(target), _fmt_full(mu0), _fmt_full(achieved),
            ])
            json_rows.append({
                "l_el_km": length, "fidelity_target": target,
                "mu0": mu0, "fidelity_achieved": achieved,
            })
            if not args.quiet:
                print(f"L={length:g} km  F_target={target:g}  ->  mu0={mu0:.6f}")

    out = _out_dir(cfg, args)
    fmt = _out_format(cfg, args)
    path = out / f"solve.{fmt}"
    if fmt == "csv":
        _write_csv(path, _echo_with_tool(cfg), header, rows)
    else:
        _write_json(path, _echo_with_tool(cfg), json_rows)
    if not args.quiet:
        print(f"wrote {path}")
    return EXIT_OK


# --- verification checks -----------------------------------------------------

def _degenerate_spec(gamma_hz: float) -> SourceSpec:
    # equal linewidths, zero centre detuning: the mode profile is an exact
    # Lorentzian whose norm integral has the closed form pi * gamma / 2
    fsr = 100e6
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cav = CavityParams(fsr=fsr, finesse=fsr / gamma_hz)
    return SourceSpec(
        nu_p0=2_000_000 * fsr, sig=cav, idl=cav,
        k_s=1_000_000, k_i=1_000_000, side_modes=0,
    )


def _check_quadrature_oracle():
    worst = 0.0
    for gamma_mhz in (1.0, 2.0, 4.0):
        gamma = gamma_mhz * 1e6
        c_s, _ = normalization_constants(_degenerate_spec(gamma), 0)
        exact = math.pi * gamma / 2.0
        worst = max(worst, abs(c_s**2 / exact - 1.0))
    return worst, 1e-6


def _simpson_mode_norm(spec: SourceSpec, k: int) -> float:
    """Independent route to the C_S^2 integral: composite Simpson over a wide
    window plus analytic 1/x^2 tails."""
    delta = float(cluster_detuning(spec, k))
    g_max = max(spec.sig.fwhm, spec.idl.fwhm)
    center = float(spec.signal_center(k)) - delta / 2.0
    half = 2000.0 * g_max + abs(delta)
    n = 200_001
    nu = np.linspace(center - half, center + half, n)
    values = np.abs(mode_amplitude_signal(spec, k, nu)) ** 2
    core = simpson(values, x=nu)
    tails = spec.sig.fwhm * spec.idl.fwhm / (2.0 * half)
    return core + tails


def _check_orthonormality(spec: SourceSpec):
    worst = 0.0
    for k in sorted({-spec.side_modes, 0, spec.side_modes}):
        c_s, _ = normalization_constants(spec, k)
        worst = max(worst, abs(_simpson_mode_norm(spec, k) / c_s**2 - 1.0))
    return worst, 2e-6


def _jsa_jsi_grid_deviation(spec: SourceSpec, n: int = 200) -> float:
    span = (min(4, spec.side_modes) + 0.5)
    nu_s = np.linspace(
        spec.signal_center(0) - span * spec.sig.fsr,
        spec.signal_center(0) + span * spec.sig.fsr, n,
    )
    nu_i = np.linspace(
        spec.idler_center(0) - span * spec.idl.fsr,
        spec.idler_center(0) + span * spec.idl.fsr, n,
    )
    amp = jsa_approx(spec, nu_s[:, None], nu_i[None, :])
    intensity = jsi_approx(spec, nu_s[:, None], nu_i[None, :])
    return float(np.max(np.abs(np.abs(amp) ** 2 - intensity)))


def _check_thermal():
    worst = 0.0
    for mu in (0.01, 0.1, 1.0):
        q = mu / (mu + 1.0)
        n_max = max(60, int(math.ceil(math.log(1e-12) / math.log(q))) + 1)
        n = np.arange(n_max + 1)
        p = np.asarray(thermal_distribution(mu, n))
        tail_total = q ** (n_max + 1)
        tail_mean = q ** (n_max + 1) * ((n_max + 1) - n_max * q) * (mu + 1.0)
        worst = max(
            worst,
            abs(float(p.sum()) + tail_total - 1.0),
            abs(float(np.sum(n * p)) + tail_mean - mu),
        )
    return worst, 1e-9


def _lorentzian_airy_deviation(cav: CavityParams, window: int = 50) -> float:
    nu = np.linspace(0.0, cav.fsr, 100_001)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        approx = airy_lorentzian_sum(nu, cav, -window, window)
    return float(np.max(np.abs(approx - airy_normalized(nu, cav))))


def cmd_verify(cfg: RunConfig, args) -> int:
    spec = cfg.source
    lines = []
    failed = False

    def record(name: str, measured: float, tol: float, note: str = ""):
        nonlocal failed
        ok = measured <= tol
        failed = failed or not ok
        suffix = f" ({note})" if note else ""
        lines.append(
            f"[{'PASS' if ok else 'FAIL'}] {name}: measured={measured:.3e} "
            f"tol={tol:.1e}{suffix}"
        )

    measured, tol = _check_quadrature_oracle()
    record("quadrature-closed-form-oracle", measured, tol,
           "degenerate Lorentzian norm vs pi*gamma/2")

    measured, tol = _check_orthonormality(spec)
    record("mode-function-normalisation", measured, tol,
           "package quadrature vs independent Simpson integral")

    if spec.side_modes == 0:
        record("jsa-jsi-grid", _jsa_jsi_grid_deviation(spec), 1e-12,
               "single mode: amplitude-squared equals intensity exactly")
    else:
        # cross terms dropped by the intensity form scale as 1/(F_S F_I);
        # the 1e-3 floor is the design-point bound for finesse >= 61/83
        tol = max(1e-3, 4.0 / (spec.sig.finesse * spec.idl.finesse))
        record("jsa-jsi-grid", _jsa_jsi_grid_deviation(spec), tol,
               "max | |amplitude|^2 - intensity | over the central modes")

    measured, tol = _check_thermal()
    record("thermal-distribution", measured, tol,
           "normalisation and mean of the pair-number distribution")

    for label, cav in (("signal", spec.sig), ("idler", spec.idl)):
        if not cav.lorentzian_valid:
            lines.append(
                f"[WARN] lorentzian-approximation-{label}: finesse={cav.finesse:g} "
                "is below 10; per-peak Lorentzian treatment not trusted"
            )
            continue
        measured = _lorentzian_airy_deviation(cav)
        if cav.finesse >= 30.0:
            record(f"lorentzian-sum-vs-airy-{label}", measured, 1e-3)
        else:
            lines.append(
                f"[INFO] lorentzian-sum-vs-airy-{label}: measured={measured:.3e} "
                "(finesse below 30; 1e-3 bound not asserted)"
            )

    for line in lines:
        print(line)
    print(f"verification {'FAILED' if failed else 'passed'}")
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cspdclink",
        description=(
            "Frequency-multiplexed entanglement generation over repeater "
            "elementary links fed by a doubly resonant pair source"
        ),
    )
    parser.add_argument("--version", action="version", version=f"cspdclink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="run-configuration file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--format", choices=("csv", "json"),
                       help="artifact format (overrides the config)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_modes = sub.add_parser("modes", help="write the per-mode decomposition table")
    add_common(p_modes)

    p_table = sub.add_parser("table", help="write single-mode vs multiplexed link tables")
    add_common(p_table)

    p_spec = sub.add_parser("spectrum", help="write a signal-spectrum sweep")
    add_common(p_spec)
    p_spec.add_argument("--window", default="1",
                        help="mode window: half-width N for -N:N, or explicit LO:HI "
                             "(default 1, the three centre modes)")
    p_spec.add_argument("--points", type=int, help="number of samples (overrides config)")
    p_spec.add_argument("--jsi-slice", action="store_true",
                        help="add the joint-intensity slice along energy conservation")

    p_verify = sub.add_parser("verify", help="run the numerical self-checks")
    add_common(p_verify)

    p_solve = sub.add_parser("solve", help="solve reference photon numbers from fidelity targets")
    add_common(p_solve)

    return parser


_COMMANDS = {
    "modes": cmd_modes,
    "table": cmd_table,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "solve": cmd_solve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except QuadratureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR
    except (ValueError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
