"""nvforge command line.

    python cli.py implant --config run.toml --ions 10000 --mode cascade --seed 1 --out results.json
    python cli.py analyze --in results_C.json --compare results_N.json --out summary.json
    python cli.py etalon --in spectrum.csv --n 2.41 --dmin 1 --dmax 10 --out fit.json
    python cli.py ple --emitter emitter.toml --scan scan.toml --seed 1 --out scan.csv
    python cli.py ple-fit --in scan.csv --out fit.json
    python cli.py stats --in linewidths.csv --threshold 150 --out stats.json
    python cli.py hom --fwhm-mhz 150 --t1-ns 12 --window-ps 300
    python cli.py hom --invert --target-v 0.9 --t1-ns 12 --window-ps 300
    python cli.py bk-gain --bare 0.03 --enhanced 0.3
    python cli.py reproduce fig1b --out-dir out/ --ions 10000

Exit codes: 0 success, 1 physics or fit error, 2 usage error.
"""

import argparse
import sys
import time
from typing import Any, Callable, Dict, List, Optional

from damage.histograms import comparison_report
from damage.results import read_results, write_results
from linewidths.reference import export_region_table, load_linewidths
from linewidths.stats import ecdf_with_band, lognormal_mle, median_by_thickness, threshold_report
from materials.presets import beam_from_config, target_from_config
from optics.etalon import RefractiveIndex
from optics.fit import fit_thickness
from optics.spectrum import read_spectrum
from photons.interference import (
    FilterWindow,
    PhotonSource,
    barrett_kok_gain,
    hom_visibility,
    max_linewidth_for_visibility,
)
from pipeline.core import DEFAULT_IONS, REPRODUCE_SEED, FigureReproducer
from ple.fitting import fit_line_gaussian
from ple.model import emitter_from_config, read_scan, scan_from_config, write_scan
from ple.simulate import simulate_ple_scan
from runtime.config import load_config, logger, merge_overrides, resolve_threads, set_run_id
from runtime.errors import NvForgeError, UsageError
from runtime.manifest import RunManifest
from transport.engine import run_implantation
from transport.records import DamageMode
from utils.artifacts import STDOUT, write_json

DEFAULT_SLAB_NM = 1000.0
IMPLANT_KEYS = {"slab_thickness_nm", "bin_width_nm", "mode", "ions", "seed"}


def _manifest(command: str, config: Dict[str, Any], seed: Optional[int], start: float) -> RunManifest:
    manifest = RunManifest.for_run(command, config, seed)
    manifest.wall_time_s = time.time() - start
    return manifest


def _section(config: Dict[str, Any], name: str) -> Dict[str, Any]:
    """A named TOML section, or the whole file when it has no sections."""
    if name in config:
        return dict(config[name])
    if any(isinstance(v, dict) for v in config.values()):
        return {}
    return dict(config)


def cmd_implant(args: argparse.Namespace) -> int:
    start = time.time()
    config = load_config(args.config)
    implant = merge_overrides(config.get("implant", {}), ions=args.ions, mode=args.mode, seed=args.seed,
                              slab_thickness_nm=args.slab_nm, bin_width_nm=args.bin_width)
    unknown = set(implant) - IMPLANT_KEYS
    if unknown:
        raise UsageError(f"unknown keys in [implant]: {sorted(unknown)}")
    target = target_from_config(config.get("target", {}))
    beam = beam_from_config(config.get("beam", {}))
    mode = DamageMode.parse(implant.get("mode", DamageMode.FULL_CASCADE.value))
    seed = int(implant.get("seed", 0))
    n_ions = int(implant.get("ions", 1000))
    slab = float(implant.get("slab_thickness_nm", DEFAULT_SLAB_NM))
    bin_width = implant.get("bin_width_nm")

    result = run_implantation(beam, target, slab, n_ions, mode=mode, seed=seed,
                              workers=resolve_threads(args.threads))
    resolved = {"target": target.to_dict(), "beam": beam.to_dict(), "mode": mode.value, "ions": n_ions,
                "seed": seed, "slab_thickness_nm": slab, "bin_width_nm": bin_width}
    write_results(result, args.out, _manifest("implant", resolved, seed, start),
                  float(bin_width) if bin_width is not None else None)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    start = time.time()
    first = read_results(args.input)
    ion, vac = first.summaries()
    payload: Dict[str, Any] = {"inputs": [{"ion": ion.to_dict(), "vacancy": vac.to_dict()}]}
    if args.compare:
        payload = comparison_report((ion, vac), read_results(args.compare).summaries())
    config = {"in": first.meta, "compare": args.compare}
    write_json(payload, args.out, _manifest("analyze", config, None, start))
    return 0


def cmd_etalon(args: argparse.Namespace) -> int:
    start = time.time()
    spectrum = read_spectrum(args.input)
    index = RefractiveIndex(args.n, args.cauchy_b)
    fit = fit_thickness(spectrum, index, (args.dmin, args.dmax), envelope=args.envelope)
    config = {"in": args.input, "n": args.n, "cauchy_b": args.cauchy_b, "dmin": args.dmin, "dmax": args.dmax,
              "envelope": args.envelope}
    write_json(fit.to_dict(), args.out, _manifest("etalon", config, None, start))
    return 0


def cmd_ple(args: argparse.Namespace) -> int:
    start = time.time()
    emitter = emitter_from_config(_section(load_config(args.emitter), "emitter"))
    cfg = scan_from_config(_section(load_config(args.scan), "scan"))
    scan = simulate_ple_scan(emitter, cfg, seed=args.seed, workers=resolve_threads(args.threads))
    config = {"emitter": emitter.to_dict(), "scan": cfg.to_dict()}
    write_scan(scan, args.out, _manifest("ple", config, args.seed, start))
    return 0


def cmd_ple_fit(args: argparse.Namespace) -> int:
    start = time.time()
    fit = fit_line_gaussian(read_scan(args.input))
    write_json(fit.to_dict(), args.out, _manifest("ple-fit", {"in": args.input}, None, start))
    return 0


def stats_payload(samples, threshold: float, alpha: float = 0.05, band: str = "dkw") -> Dict[str, Any]:
    """Fits, ECDFs with bands, threshold fractions and the per-region table of a linewidth set."""
    labels = sorted({s.sample_label for s in samples})
    groups = {label: [s for s in samples if s.sample_label == label] for label in labels}
    groups["all"] = list(samples)
    fits, ecdfs = {}, {}
    for name, chosen in groups.items():
        if len(chosen) >= 3:
            fits[name] = lognormal_mle(chosen).to_dict()
        ecdfs[name] = ecdf_with_band(chosen, alpha, band).to_dict()
    return {
        "threshold_mhz": threshold,
        "fits": fits,
        "ecdf": ecdfs,
        "fractions_below": threshold_report(samples, threshold),
        "regions": median_by_thickness(samples).to_dict(orient="records"),
    }


def cmd_stats(args: argparse.Namespace) -> int:
    start = time.time()
    samples = load_linewidths(args.input)
    payload = stats_payload(samples, args.threshold, args.alpha, args.band)
    if args.excel:
        export_region_table(median_by_thickness(samples), args.excel)
    config = {"in": args.input, "threshold": args.threshold, "alpha": args.alpha, "band": args.band}
    write_json(payload, args.out, _manifest("stats", config, None, start))
    return 0


def cmd_hom(args: argparse.Namespace) -> int:
    start = time.time()
    config = {"t1_ns": args.t1_ns, "window_ps": args.window_ps}
    if args.invert:
        payload = {"max_fwhm_mhz": max_linewidth_for_visibility(args.t1_ns, args.window_ps, args.target_v)}
        config["target_v"] = args.target_v
    else:
        if args.fwhm_mhz is None:
            raise UsageError("hom needs --fwhm-mhz unless --invert is given")
        source = PhotonSource(args.t1_ns, args.fwhm_mhz)
        payload = {"visibility": hom_visibility(source, FilterWindow(args.window_ps)),
                   "lifetime_limit_mhz": source.lifetime_limit}
        config["fwhm_mhz"] = args.fwhm_mhz
    write_json(payload, args.out, _manifest("hom", config, None, start))
    return 0


def cmd_bk_gain(args: argparse.Namespace) -> int:
    start = time.time()
    payload = {"gain": barrett_kok_gain(args.bare, args.enhanced)}
    write_json(payload, args.out, _manifest("bk-gain", {"bare": args.bare, "enhanced": args.enhanced}, None, start))
    return 0


def cmd_reproduce(args: argparse.Namespace) -> int:
    if args.figure not in FigureReproducer.FIGURES:
        raise UsageError(f"unknown figure {args.figure!r}; choose from {', '.join(FigureReproducer.FIGURES)}")
    reproducer = FigureReproducer(args.out_dir, n_ions=args.ions, seed=args.seed,
                                  workers=resolve_threads(args.threads))
    report = reproducer.run(args.figure)
    if not report["passed"]:
        logger.warning(f"⚠️ {args.figure}: missed targets; report in {args.out_dir}")
        return 1
    logger.info(f"📝 {args.figure}: passed; report in {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvforge", description="NV-center carbon implantation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable[[argparse.Namespace], int], help_text: str,
            out: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--threads", type=int, default=None, help="worker count, 0 = all cores (NVFORGE_THREADS)")
        if out:
            p.add_argument("--out", default=STDOUT, help="output file, '-' for stdout")
        p.set_defaults(handler=handler)
        return p

    p = add("implant", cmd_implant, "Monte Carlo ion implantation")
    p.add_argument("--config", default=None, help="TOML file with [target], [beam], [implant]")
    p.add_argument("--ions", type=int, default=None)
    p.add_argument("--mode", default=None, help="cascade | kp")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--slab-nm", type=float, default=None)
    p.add_argument("--bin-width", type=float, default=None, help="histogram bin width in nm")

    p = add("analyze", cmd_analyze, "Peak depths, yields and species differences")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--compare", default=None, help="15N results file to compare against")

    p = add("etalon", cmd_etalon, "Slab thickness from sideband fringes")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--n", type=float, default=2.41)
    p.add_argument("--cauchy-b", type=float, default=0.0, help="Cauchy B coefficient in um^2")
    p.add_argument("--dmin", type=float, default=1.0)
    p.add_argument("--dmax", type=float, default=10.0)
    p.add_argument("--envelope", choices=("median", "poly"), default="median")

    p = add("ple", cmd_ple, "Simulate a PLE scan")
    p.add_argument("--emitter", required=True, help="TOML emitter model")
    p.add_argument("--scan", required=True, help="TOML scan configuration")
    p.add_argument("--seed", type=int, default=0)

    p = add("ple-fit", cmd_ple_fit, "Gaussian fit of a PLE scan")
    p.add_argument("--in", dest="input", required=True)

    p = add("stats", cmd_stats, "Linewidth population statistics")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--threshold", type=float, default=150.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--band", choices=("dkw", "binomial"), default="dkw")
    p.add_argument("--excel", default=None, help="also write the per-region table to this .xlsx")

    p = add("hom", cmd_hom, "Filtered two-photon interference visibility")
    p.add_argument("--fwhm-mhz", type=float, default=None)
    p.add_argument("--t1-ns", type=float, default=12.0)
    p.add_argument("--window-ps", type=float, default=300.0)
    p.add_argument("--invert", action="store_true", help="solve for the largest linewidth reaching --target-v")
    p.add_argument("--target-v", type=float, default=0.9)

    p = add("bk-gain", cmd_bk_gain, "Entanglement rate gain from ZPL enhancement")
    p.add_argument("--bare", type=float, required=True)
    p.add_argument("--enhanced", type=float, required=True)

    p = add("reproduce", cmd_reproduce, "Reproduce a figure with pinned seeds", out=False)
    p.add_argument("figure", help=", ".join(FigureReproducer.FIGURES))
    p.add_argument("--out-dir", default="reproduce")
    p.add_argument("--ions", type=int, default=DEFAULT_IONS)
    p.add_argument("--seed", type=int, default=REPRODUCE_SEED)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    set_run_id()
    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(f"❌ {e}")
        return 2
    except NvForgeError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
