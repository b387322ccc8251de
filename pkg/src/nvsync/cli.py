"""Command line interface.

    nvsync COMMAND [--config PATH] [--out DIR] [--format {csv,json}]

Commands:

* ``fig2``    fidelity-vs-drive sweep (CSV or JSON, plus SVG)
* ``fig3``    synchronized working-point scatter (CSV or JSON, plus SVG)
* ``table1``  rotating-wave-validity benchmark rerun (CSV and JSON)
* ``table2``  strong-transverse-coupling benchmark rerun (CSV and JSON)
* ``design``  working-point design report (JSON; needs --config)
* ``simulate`` one full-dynamics run, scored (JSON; needs --config)

--config points at a TOML or JSON file whose section named after the
command overrides that command's defaults (for design/simulate it is the
whole input).  --format applies to fig2/fig3; the table commands always
write both formats and design/simulate always write JSON.

Every command is deterministic for a fixed config.  The environment
variable NVSYNC_SEED is reserved for stochastic extensions and currently
ignored; nothing in the pipeline draws random numbers.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments

_EXIT_INFEASIBLE = 2


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib  # py >= 3.11
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _section(config: dict, name: str) -> dict:
    return config.get(name, config)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nvsync",
        description="synchronized NV electron-nuclear gate design and reproduction",
    )
    parser.add_argument("command", choices=["fig2", "fig3", "table1", "table2", "design", "simulate"])
    parser.add_argument("--config", default=None, help="TOML or JSON parameter file")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--format", default="csv", choices=["csv", "json"],
                        help="tabular format for fig2/fig3 (default: csv)")
    args = parser.parse_args(argv)

    config = _load_config(args.config)
    out = Path(args.out)

    if args.command == "fig2":
        records = experiments.cmd_fig2(out, args.format, _section(config, "fig2"))
        print(f"fig2: {len(records)} records -> {out}")
        return 0
    if args.command == "fig3":
        records = experiments.cmd_fig3(out, args.format, _section(config, "fig3"))
        print(f"fig3: {len(records)} records -> {out}")
        return 0
    if args.command in ("table1", "table2"):
        cmd = experiments.cmd_table1 if args.command == "table1" else experiments.cmd_table2
        records = cmd(out, _section(config, "table"))
        _print_table(args.command, records)
        print(f"{args.command}: {len(records)} records -> {out}")
        return 0
    if args.command == "design":
        if not config:
            parser.error("design needs --config with a_par_over_2pi_hz and omega_l_over_2pi_hz")
        report = experiments.cmd_design(_section(config, "design"))
        out.mkdir(parents=True, exist_ok=True)
        experiments.write_json(out / "design.json", report)
        if "error" in report:
            print(f"design: infeasible ({report['error']['message']})", file=sys.stderr)
            return _EXIT_INFEASIBLE
        print(f"design: report -> {out / 'design.json'}")
        return 0
    if args.command == "simulate":
        if not config:
            parser.error("simulate needs --config with register and sequence sections")
        try:
            report = experiments.cmd_simulate(_section(config, "simulate"))
        except (RuntimeError, ValueError, KeyError) as exc:
            print(f"simulate: {exc}", file=sys.stderr)
            return 1
        out.mkdir(parents=True, exist_ok=True)
        experiments.write_json(out / "simulate.json", report)
        if "fidelity" in report:
            print(f"simulate: f_avg = {report['fidelity']['f_avg']:.6f} -> {out / 'simulate.json'}")
        else:
            print(f"simulate: propagator -> {out / 'simulate.json'}")
        return 0
    raise AssertionError(args.command)


def _print_table(name: str, records: list[dict]) -> None:
    """Side-by-side console view: computed | reference | deviation."""
    cols = ("f_sync1_aperp0", "f_sync1_aperp", "f_sync2_aperp")
    print(f"{name}  (computed / reference / |dev|; durations us)")
    for rec in records:
        head = (f"  {rec['waveform']:<8} A_par={rec['a_par_khz']:>5g}  "
                f"w_l={rec['omega_l_khz']:>5g}  A_perp={rec['a_perp_khz']:>4g}")
        cells = [
            f"{c.removeprefix('f_sync')}: {rec[c]:.5f}/{rec[c + '_ref']:.5f}/{rec[c + '_dev']:.1e}"
            for c in cols
        ]
        times = (f"tg1 {rec['tg1_us']:.1f}/{rec['tg1_ref_us']:g}  "
                 f"tg2 {rec['tg2_us']:.1f}/{rec['tg2_ref_us']:g}")
        print(head + "  " + "  ".join(cells) + "  " + times)


if __name__ == "__main__":
    raise SystemExit(main())
