import argparse
from pathlib import Path

from ode_mmse import SystemConfig, make_rng, sample_channel, save_channel


def parser(doc, n=8, trials=10_000):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="channel seed")
    p.add_argument("--mc-seed", type=int, default=2026)
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--output", type=Path, default=Path("results"))
    return p


def channel(args):
    cfg = SystemConfig(args.n, args.n, args.sigma2, args.seed)
    H = sample_channel(cfg, make_rng(args.seed))
    args.output.mkdir(parents=True, exist_ok=True)
    save_channel(H, args.output / "channel.txt")
    return cfg, H
