"""Train a residual network from flight logs and export the bundle.

Example:
    residual-train --arch tcn-medium --data logs/ --out residual.json --seed 0
"""

from __future__ import annotations

import argparse
import sys

from quadbem import config as qcfg
from quadbem.harness import identify_quadratic_from_bem

from .datasets import WindowDataset, load_log_dir, make_examples, rotor_model_wrench
from .export import export_bundle
from .train import TrainingConfig, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="residual-train", description=__doc__)
    parser.add_argument("--arch", default="tcn-medium", help="mlp | tcn-small | tcn-medium | tcn-large")
    parser.add_argument("--data", required=True, help="directory of processed flight-log CSVs")
    parser.add_argument("--out", required=True, help="output bundle path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--model", default="fit", help="rotor model for the labels: none | fit | bem")
    parser.add_argument(
        "--max-speed", type=float, default=None,
        help="reduced-dataset protocol: train only on logs whose peak speed stays below this [m/s]",
    )
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--val-fraction", type=float, default=0.2)
    parser.add_argument("--curve-out", default=None, help="per-epoch loss CSV")
    parser.add_argument("--vehicle", default=None)
    parser.add_argument("--geometry", default=None)
    args = parser.parse_args(argv)

    vehicle = qcfg.load_vehicle(args.vehicle)
    geometry = qcfg.load_geometry(args.geometry)
    coeffs = identify_quadratic_from_bem(geometry, rho=vehicle.rho) if args.model in ("fit",) else None

    logs = load_log_dir(args.data)
    if args.max_speed is not None:
        from quadbem.pipeline import filter_logs_by_speed

        kept = filter_logs_by_speed(logs, args.max_speed)
        print(f"reduced dataset: {len(kept)}/{len(logs)} logs under {args.max_speed} m/s")
        logs = kept
        if not logs:
            raise SystemExit("no logs satisfy the speed bound")
    parts = []
    for log in logs:
        f_model, tau_model = rotor_model_wrench(log, vehicle, geometry, model=args.model, coeffs=coeffs)
        parts.append(make_examples(log, f_model, tau_model))
    dataset = WindowDataset.concatenate(parts)
    print(f"dataset: {len(dataset)} windows from {len(logs)} logs (rotor model: {args.model})")

    cfg = TrainingConfig(
        architecture=args.arch, learning_rate=args.lr, batch_size=args.batch, epochs=args.epochs,
        seed=args.seed, val_fraction=args.val_fraction, curve_path=args.curve_out,
    )
    trained = train(dataset, cfg)
    final = trained.history[-1]
    print(f"trained {args.arch}: train_loss={final['train_loss']:.5f} val_loss={final['val_loss']:.5f}")

    gap = export_bundle(trained, args.out, dataset.windows)
    print(f"exported {args.out} (parity max |delta| = {gap:.2e})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
