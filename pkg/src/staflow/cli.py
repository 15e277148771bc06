"""Command-line surface tying the pipeline together.

Commands mirror the workflow stages: `flow` (frame pair -> flow file),
`describe` (sequence -> descriptor), `cv` (manifest -> confusion + accuracy),
`sweep` (parameter grids -> report), `colorize` (flow file -> image), and
`synth` (generate the synthetic fixtures the acceptance suite runs on).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

import argparse
import json
import os
import sys
import traceback
from dataclasses import replace
from itertools import product
from pathlib import Path

import numpy as np

from . import bench
from .colorize import flow_to_color, save_image
from .errors import StaflowError
from .flow import (
    FarnebackParams,
    TvL1Params,
    farneback_flow,
    read_flo,
    tvl1_flow,
    write_flo,
)
from .learn import ForestConfig, SvmConfig
from .raster import load_pgm, save_pgm
from .sta import StaParams
from .synth import make_recognition_dataset, translation_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_farneback_flags(parser):
    group = parser.add_argument_group("farneback parameters")
    group.add_argument("--w", type=int, default=2, help="averaging half-width w; window = 2w+1 (default 2)")
    group.add_argument("--s", type=int, default=5, help="polynomial-expansion neighborhood size s, odd (default 5)")
    group.add_argument("--sigma", type=float, default=1.1, help="std sigma of the expansion applicability Gaussian (default 1.1)")
    group.add_argument("--fb-levels", type=int, default=3, help="pyramid levels (default 3)")
    group.add_argument("--fb-scale", type=float, default=0.5, help="pyramid scale in (0,1) (default 0.5)")
    group.add_argument("--iterations", type=int, default=3, help="refinement passes per level (default 3)")


def _add_tvl1_flags(parser):
    group = parser.add_argument_group("tv-l1 parameters")
    group.add_argument("--lambda", dest="lam", type=float, default=0.05, help="data-term weight lambda (default 0.05)")
    group.add_argument("--theta", type=float, default=0.1, help="tightness theta (default 0.1)")
    group.add_argument("--tau", type=float, default=0.15, help="time step tau (default 0.15)")
    group.add_argument("--warps", type=int, default=5, help="warping iterations per level (default 5)")
    group.add_argument("--tv-levels", type=int, default=5, help="pyramid levels (default 5)")
    group.add_argument("--tv-scale", type=float, default=0.5, help="pyramid scale in (0,1) (default 0.5)")
    group.add_argument("--epsilon", type=float, default=0.01, help="stopping threshold on flow change (default 0.01)")
    group.add_argument("--max-inner-iterations", type=int, default=300, help="inner iteration cap (default 300)")
    group.add_argument("--no-median-filter", action="store_true", help="disable the 5x5 median filter after each warp")


def _add_sta_flags(parser):
    group = parser.add_argument_group("descriptor parameters")
    group.add_argument("--m", type=int, default=8, help="grid columns m (default 8)")
    group.add_argument("--n", type=int, default=6, help="grid rows n (default 6)")
    group.add_argument("--k1", type=int, default=8, help="orientation bins k1 per grid histogram (default 8)")
    group.add_argument("--k2", type=int, default=5, help="temporal bins k2 per component histogram (default 5)")
    group.add_argument("--unweighted", action="store_true", help="count orientation votes equally instead of weighting by magnitude")


def _add_classifier_flags(parser):
    group = parser.add_argument_group("classifier parameters")
    group.add_argument("--classifier", choices=("forest", "svm"), default="forest")
    group.add_argument("--trees", type=int, default=100, help="forest size (default 100)")
    group.add_argument("--depth", type=int, default=15, help="maximum tree depth (default 15)")
    group.add_argument("--features-per-split", type=int, default=None, help="candidate features per split (default round(sqrt(d)))")
    group.add_argument("--svm-c", type=float, default=1.0, help="SVM regularization C (default 1.0)")
    group.add_argument("--svm-max-iterations", type=int, default=100000, help="SVM iteration cap (default 1e5)")
    group.add_argument("--svm-tolerance", type=float, default=1e-12, help="SVM objective-change tolerance (default 1e-12)")


def _flow_params(args):
    farneback = FarnebackParams(
        w=args.w, s=args.s, sigma=args.sigma,
        levels=args.fb_levels, scale=args.fb_scale, iterations=args.iterations,
    )
    tvl1 = TvL1Params(
        lam=args.lam, theta=args.theta, tau=args.tau,
        warps=args.warps, levels=args.tv_levels, scale=args.tv_scale,
        epsilon=args.epsilon, max_inner_iterations=args.max_inner_iterations,
        median_filter=not args.no_median_filter,
    )
    return farneback if args.algo == "farneback" else tvl1


def _sta_params(args):
    return StaParams(m=args.m, n=args.n, k1=args.k1, k2=args.k2, weighted=not args.unweighted)


def _classifier_config(args, seed):
    if args.classifier == "forest":
        return ForestConfig(
            n_trees=args.trees, max_depth=args.depth,
            n_features_per_split=args.features_per_split, seed=seed,
        )
    return SvmConfig(c=args.svm_c, max_iterations=args.svm_max_iterations, tolerance=args.svm_tolerance)


def _cmd_flow(args):
    prev = load_pgm(args.prev)
    nxt = load_pgm(args.next)
    params = _flow_params(args)
    solver = farneback_flow if args.algo == "farneback" else tvl1_flow
    flow = solver(prev, nxt, params)
    if args.out:
        write_flo(flow, args.out)
        print(f"wrote {args.out}")
    if args.color:
        save_image(flow_to_color(flow, args.max_magnitude), args.color)
        print(f"wrote {args.color}")
    mag = flow.magnitude()
    print(f"flow {flow.width}x{flow.height}: max |flow| = {mag.max():.4f}, mean = {mag.mean():.4f}")
    return EXIT_OK


def _cmd_describe(args):
    record = bench.SequenceRecord(
        id=args.id,
        person=0,
        action=bench.ACTIONS[0],
        scenario=1,
        frame_dir=args.frames,
        annotation_file=args.annotations,
        frame_count=args.frame_count
        or len([p for p in os.listdir(args.frames) if p.endswith(".pgm")]),
    )
    flow_fn = bench.flow_function(args.algo, _flow_params(args))
    sta_params = _sta_params(args)
    descriptor = bench.sequence_descriptor(record, flow_fn, sta_params, truncate=args.truncate)
    if args.out:
        bench.descriptor_to_json(descriptor, sta_params, args.out, meta={"id": args.id})
        print(f"wrote {args.out} ({len(descriptor)} components)")
    else:
        json.dump(
            {"id": args.id, "kind": descriptor.kind, "values": descriptor.values.tolist()},
            sys.stdout,
        )
        print()
    return EXIT_OK


def _cmd_cv(args):
    manifest = bench.load_manifest(args.manifest)
    samples, skipped = bench.extract_dataset(
        manifest, args.algo, _flow_params(args), _sta_params(args),
        jobs=args.jobs, truncate=args.truncate,
    )
    for rec_id in skipped:
        print(f"skipped {rec_id}: no usable frames", file=sys.stderr)
    if args.save_descriptors:
        kept = [r for r in manifest.records if r.id not in set(skipped)]
        bench.descriptors_to_csv(kept, samples, args.save_descriptors)
        print(f"wrote {args.save_descriptors}")
    confusion = bench.cross_validate(samples, _classifier_config(args, args.seed), jobs=args.jobs)
    print(bench.format_confusion(confusion))
    acc = bench.accuracy(confusion)
    print(f"accuracy: {acc:.4f} ({np.trace(confusion.counts)}/{confusion.total})")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(
                {
                    "accuracy": acc,
                    "confusion": confusion.counts.tolist(),
                    "labels": list(confusion.labels),
                    "skipped": skipped,
                },
                fh,
                indent=1,
            )
        print(f"wrote {args.out}")
    return EXIT_OK


def _grid_values(text, cast):
    return [cast(tok) for tok in text.split(",") if tok.strip()]


def _cmd_sweep(args):
    manifest = bench.load_manifest(args.manifest)

    base_flow = _flow_params(args)
    if args.algo == "farneback":
        axes = {
            "w": _grid_values(args.w_grid, int) if args.w_grid else [base_flow.w],
            "s": _grid_values(args.s_grid, int) if args.s_grid else [base_flow.s],
            "sigma": _grid_values(args.sigma_grid, float) if args.sigma_grid else [base_flow.sigma],
        }
    else:
        axes = {
            "lam": _grid_values(args.lambda_grid, float) if args.lambda_grid else [base_flow.lam],
            "theta": _grid_values(args.theta_grid, float) if args.theta_grid else [base_flow.theta],
            "tau": _grid_values(args.tau_grid, float) if args.tau_grid else [base_flow.tau],
        }
    flow_settings = []
    keys = list(axes)
    for combo in product(*(axes[k] for k in keys)):
        flow_settings.append((args.algo, replace(base_flow, **dict(zip(keys, combo)))))

    m_grid = _grid_values(args.m_grid, int)
    n_grid = _grid_values(args.n_grid, int)
    pairs = {(m, n) for m in m_grid for n in n_grid}
    if not args.no_swap_mn:
        pairs |= {(n, m) for m in m_grid for n in n_grid}
    sta_settings = [
        StaParams(m=m, n=n, k1=k1, k2=k2, weighted=not args.unweighted)
        for (m, n) in sorted(pairs)
        for k1 in _grid_values(args.k1_grid, int)
        for k2 in _grid_values(args.k2_grid, int)
    ]

    classifier_settings = []
    for trees in _grid_values(args.trees_grid, int):
        for depth in _grid_values(args.depth_grid, int):
            classifier_settings.append(
                ForestConfig(
                    n_trees=trees, max_depth=depth,
                    n_features_per_split=args.features_per_split, seed=args.seed,
                )
            )

    rows = bench.sweep(
        manifest, flow_settings, sta_settings, classifier_settings,
        jobs=args.jobs, truncate=args.truncate,
    )
    print(f"{len(rows)} combinations evaluated; best first:")
    for row in rows[: args.top]:
        sp = row.sta_params
        print(
            f"  acc={row.accuracy:.4f} algo={row.algo} "
            f"m={sp.m} n={sp.n} k1={sp.k1} k2={sp.k2} "
            f"clf={type(row.classifier).__name__}"
        )
    if args.out:
        if args.out.endswith(".csv"):
            bench.sweep_rows_to_csv(rows, args.out)
        else:
            bench.sweep_rows_to_json(rows, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_colorize(args):
    flow = read_flo(args.flow)
    save_image(flow_to_color(flow, args.max_magnitude), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_synth(args):
    if args.kind == "dataset":
        manifest = make_recognition_dataset(
            args.out,
            persons=args.persons,
            sequences_per_action=args.sequences,
            frames=args.frames,
            width=args.width or 64,
            height=args.height or 48,
            seed=args.seed,
        )
        print(f"wrote {manifest}")
        return EXIT_OK

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenes = translation_suite(
        n_scenes=args.scenes, width=args.width or 160, height=args.height or 120, seed=args.seed
    )
    truth = []
    for idx, (prev, nxt, shift) in enumerate(scenes):
        save_pgm(prev, out / f"scene_{idx:03d}_a.pgm")
        save_pgm(nxt, out / f"scene_{idx:03d}_b.pgm")
        truth.append({"scene": idx, "tx": shift[0], "ty": shift[1]})
    with open(out / "ground_truth.json", "w") as fh:
        json.dump(truth, fh, indent=1)
    print(f"wrote {len(scenes)} scene pairs + ground_truth.json under {out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="staflow", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_flow = sub.add_parser("flow", help="dense flow between two PGM frames")
    p_flow.add_argument("prev", help="first frame (PGM)")
    p_flow.add_argument("next", help="second frame (PGM)")
    p_flow.add_argument("--algo", choices=("farneback", "tvl1"), default="farneback")
    p_flow.add_argument("-o", "--out", help="write the flow field here (.flo)")
    p_flow.add_argument("--color", help="also write a colorized image (.ppm or .png)")
    p_flow.add_argument("--max-magnitude", type=float, default=None, help="saturation normalization (default: field max)")
    _add_farneback_flags(p_flow)
    _add_tvl1_flags(p_flow)
    p_flow.set_defaults(func=_cmd_flow)

    p_desc = sub.add_parser("describe", help="STA2 descriptor of one frame sequence")
    p_desc.add_argument("--frames", required=True, help="directory of frame_000001.pgm ... files")
    p_desc.add_argument("--annotations", required=True, help="per-frame 'frame x y w h' text file")
    p_desc.add_argument("--frame-count", type=int, default=None)
    p_desc.add_argument("--id", default="sequence")
    p_desc.add_argument("--algo", choices=("farneback", "tvl1"), default="farneback")
    p_desc.add_argument("--truncate", type=float, default=None, help="use only this leading fraction of frame pairs")
    p_desc.add_argument("-o", "--out", help="write descriptor JSON here (default: stdout)")
    _add_farneback_flags(p_desc)
    _add_tvl1_flags(p_desc)
    _add_sta_flags(p_desc)
    p_desc.set_defaults(func=_cmd_describe)

    p_cv = sub.add_parser("cv", help="leave-one-person-out cross-validation over a manifest")
    p_cv.add_argument("--manifest", required=True)
    p_cv.add_argument("--algo", choices=("farneback", "tvl1"), default="farneback")
    p_cv.add_argument("--seed", type=int, default=0, help="master seed feeding all stochastic components")
    p_cv.add_argument("--jobs", type=int, default=1, help="worker processes for per-sequence and per-fold work")
    p_cv.add_argument("--truncate", type=float, default=None)
    p_cv.add_argument("-o", "--out", help="write a JSON report here")
    p_cv.add_argument("--save-descriptors", help="also dump the descriptors as CSV (id, person, action, values...)")
    _add_farneback_flags(p_cv)
    _add_tvl1_flags(p_cv)
    _add_sta_flags(p_cv)
    _add_classifier_flags(p_cv)
    p_cv.set_defaults(func=_cmd_cv)

    p_sweep = sub.add_parser("sweep", help="Cartesian parameter sweep with CV per combination")
    p_sweep.add_argument("--manifest", required=True)
    p_sweep.add_argument("--algo", choices=("farneback", "tvl1"), default="farneback")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--truncate", type=float, default=None)
    p_sweep.add_argument("--top", type=int, default=10, help="print this many best rows")
    p_sweep.add_argument("-o", "--out", help="write the report here (.csv or .json)")
    p_sweep.add_argument("--m-grid", default="3,6", help="grid-column counts (default '3,6')")
    p_sweep.add_argument("--n-grid", default="6,8", help="grid-row counts (default '6,8')")
    p_sweep.add_argument("--k1-grid", default="4,5,8", help="orientation bin counts (default '4,5,8')")
    p_sweep.add_argument("--k2-grid", default="5,8", help="temporal bin counts (default '5,8')")
    p_sweep.add_argument(
        "--no-swap-mn", action="store_true",
        help="do not add the swapped (m,n) pairs to the grid",
    )
    p_sweep.add_argument("--w-grid", default=None, help="farneback w values, comma-separated")
    p_sweep.add_argument("--s-grid", default=None, help="farneback s values")
    p_sweep.add_argument("--sigma-grid", default=None, help="farneback sigma values")
    p_sweep.add_argument("--lambda-grid", default=None, help="tv-l1 lambda values")
    p_sweep.add_argument("--theta-grid", default=None, help="tv-l1 theta values")
    p_sweep.add_argument("--tau-grid", default=None, help="tv-l1 tau values")
    p_sweep.add_argument("--trees-grid", default="100", help="forest sizes (default '100')")
    p_sweep.add_argument("--depth-grid", default="15", help="forest depths (default '15')")
    _add_farneback_flags(p_sweep)
    _add_tvl1_flags(p_sweep)
    _add_sta_flags(p_sweep)
    p_sweep.add_argument("--features-per-split", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_col = sub.add_parser("colorize", help="render a .flo flow file as an image")
    p_col.add_argument("flow", help="input flow field (.flo)")
    p_col.add_argument("out", help="output image (.ppm or .png)")
    p_col.add_argument("--max-magnitude", type=float, default=None)
    p_col.set_defaults(func=_cmd_colorize)

    p_synth = sub.add_parser("synth", help="generate synthetic fixtures")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--kind", choices=("translations", "dataset"), default="translations")
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.add_argument("--scenes", type=int, default=20, help="translation scenes (default 20)")
    p_synth.add_argument("--width", type=int, default=None, help="frame width (default 160, dataset 64)")
    p_synth.add_argument("--height", type=int, default=None, help="frame height (default 120, dataset 48)")
    p_synth.add_argument("--persons", type=int, default=10, help="dataset persons (default 10)")
    p_synth.add_argument("--sequences", type=int, default=2, help="sequences per action (default 2)")
    p_synth.add_argument("--frames", type=int, default=9, help="frames per sequence (default 9)")
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StaflowError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
