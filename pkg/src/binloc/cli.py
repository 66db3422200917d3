"""Command-line interface.

Exit codes: 0 on success, 2 on validation errors (argparse uses the same
code for bad usage), 3 on I/O or artifact-format errors.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .datagen import (
    GenConfig,
    evaluate_predictions,
    generate_dataset,
    read_manifest,
    read_tensor,
    tensor_to_complex,
    write_tensor,
)
from .dprtf import average_dictionary, build_dictionary, load_dictionary, save_dictionary
from .errors import FormatError, ValidationError
from .estimators import estimate_dprtf_cpsd, vad_mask
from .hrir import load_hrir_set, save_hrir_set, synth_spherical_head
from .roomsim import RoomConfig, simulate_brir
from .signals import Spectrogram, StftConfig


def _cmd_gen_hrir(args):
    head_id = args.head_id or f"sphere-{args.radius:g}"
    hset = synth_spherical_head(
        args.radius, fs=args.fs, n_taps=args.taps, ild_max_db=args.ild_db, head_id=head_id
    )
    save_hrir_set(hset, args.out)
    print(f"wrote {args.out} ({len(hset.azimuths_deg)} directions, head {head_id})")


def _cmd_build_dict(args):
    hset = load_hrir_set(args.hrir)
    dic = build_dictionary(hset, StftConfig(fs=hset.fs))
    save_dictionary(dic, args.out)
    print(f"wrote {args.out} ({len(dic.entries)} entries)")


def _cmd_avg_dict(args):
    dics = [load_dictionary(p) for p in args.inputs]
    save_dictionary(average_dictionary(dics), args.out)
    print(f"wrote {args.out} (average of {len(dics)})")


def _cmd_gen_data(args):
    cfg = GenConfig.from_json(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
        cfg.validate()
    manifest = generate_dataset(cfg, args.out, jobs=args.jobs)
    print(f"wrote {manifest}")


def _cmd_simulate_brir(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{args.config}: invalid JSON: {exc}") from exc
    try:
        room = RoomConfig(
            size_m=tuple(raw["size_m"]),
            rt60_s=float(raw["rt60_s"]),
            array_center_m=tuple(raw["array_center_m"]),
            array_yaw_deg=float(raw.get("array_yaw_deg", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad room config: {exc}") from exc
    hset = load_hrir_set(args.hrir)
    brir = simulate_brir(room, args.azimuth, args.distance, hset, max_order=args.max_order)
    write_tensor(args.out, brir.taps)
    if args.direct_out:
        write_tensor(args.direct_out, brir.direct)
    print(f"wrote {args.out} ({brir.taps.shape[1]} taps)")


def _cmd_baseline(args):
    manifest_path = Path(args.manifest)
    records = read_manifest(manifest_path)
    if not records:
        raise ValidationError("manifest contains no instances")
    root = manifest_path.parent
    cfg = StftConfig()
    with open(args.out, "w", encoding="utf-8") as fh:
        for record in records:
            data = tensor_to_complex(read_tensor(root / record["mixture_path"]))
            spec = Spectrogram(data=data.astype(np.complex128), config=cfg, first_bin=cfg.band_lo)
            mask = None if args.no_vad else vad_mask(spec)
            vec, _ = estimate_dprtf_cpsd(spec, mask=mask)
            fh.write(json.dumps({"id": record["id"], "dprtf": [float(v) for v in vec]}) + "\n")
    print(f"wrote {args.out} ({len(records)} predictions)")


def _cmd_evaluate(args):
    dictionary = load_dictionary(args.dict)
    report = evaluate_predictions(args.manifest, args.predictions, dictionary)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        overall = report["overall"]
        print(f"acc {overall['acc']:.4f} mae {overall['mae_deg']:.2f} deg "
              f"over {overall['n_instances']} instances -> {args.out}")
    else:
        print(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="binloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-hrir", help="synthesize a spherical-head HRIR set")
    p.add_argument("--radius", type=float, required=True, help="head radius in meters")
    p.add_argument("--head-id", default=None)
    p.add_argument("--fs", type=int, default=16000)
    p.add_argument("--taps", type=int, default=256)
    p.add_argument("--ild-db", type=float, default=6.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_hrir)

    p = sub.add_parser("build-dict", help="build a DP-RTF dictionary from an HRIR set")
    p.add_argument("--hrir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_dict)

    p = sub.add_parser("avg-dict", help="average two or more dictionaries")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_avg_dict)

    p = sub.add_parser("gen-data", help="generate a dataset from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the config master_seed")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("simulate-brir", help="simulate one BRIR to a DPT1 tensor")
    p.add_argument("--config", required=True, help="room JSON: size_m, rt60_s, array_center_m")
    p.add_argument("--hrir", required=True)
    p.add_argument("--azimuth", type=float, required=True)
    p.add_argument("--distance", type=float, required=True)
    p.add_argument("--max-order", type=int, default=8)
    p.add_argument("--out", required=True)
    p.add_argument("--direct-out", default=None)
    p.set_defaults(func=_cmd_simulate_brir)

    p = sub.add_parser("baseline", help="cross-PSD DP-RTF estimates for every manifest instance")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-vad", action="store_true", help="use all TF bins instead of a VAD mask")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("evaluate", help="score a predictions file against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
